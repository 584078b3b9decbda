// CLI entry: start the host. Flags: --port, --bind, --store, --disable CLASS
// (repeatable). Environment defaults: SVCOMPOSE_PORT, SVCOMPOSE_BIND,
// SVCOMPOSE_STORE.

import { ServiceHost, defaultClasses } from "./server";

function parseArgs(argv: string[]) {
  const opts = {
    port: parseInt(process.env.SVCOMPOSE_PORT ?? "8081", 10),
    bind: process.env.SVCOMPOSE_BIND ?? "127.0.0.1",
    store: process.env.SVCOMPOSE_STORE ?? "./svc-store-ts",
    disabled: [] as string[],
  };
  for (let i = 0; i < argv.length; i++) {
    const flag = argv[i];
    if (flag === "--port") opts.port = parseInt(argv[++i], 10);
    else if (flag === "--bind") opts.bind = argv[++i];
    else if (flag === "--store") opts.store = argv[++i];
    else if (flag === "--disable") opts.disabled.push(argv[++i]);
    else {
      console.error(`unknown flag: ${flag}`);
      process.exit(2);
    }
  }
  return opts;
}

async function main(): Promise<void> {
  const opts = parseArgs(process.argv.slice(2));
  const host = new ServiceHost(defaultClasses(), opts.store, {
    port: opts.port,
    bind: opts.bind,
    disabled: opts.disabled,
  });
  await host.start();
  console.log(`serving gnb, knn3, echo on ${host.baseUrl} (store: ${opts.store})`);
  const shutdown = () => {
    void host.stop().then(() => process.exit(0));
  };
  process.on("SIGINT", shutdown);
  process.on("SIGTERM", shutdown);
}

void main();
