// Protocol-compatible service host. Route grammar, wire encoding, store
// layout, status codes, and choreography behavior mirror the primary host:
//
//   POST /{classname}/new             -> create, returns the instance handle
//   POST /{classname}/{method}        -> static operation
//   POST /{classname}/{id}/{method}   -> instance operation, {id} = [0-9]+
//
// A request carrying a composition is a choreography step: execute locally,
// then relay the final result or forward the value context to the next hop.

import * as http from "node:http";
import { AddressInfo } from "node:net";

import {
  ConflictError,
  Handle,
  Payload,
  PayloadError,
  decodeArguments,
  encodeValue,
} from "./payload";
import { InstanceStore } from "./store";

const ID_RE = /^[0-9]+$/;

export interface ServiceClassDef {
  name: string;
  factory?: (args: Record<string, unknown>) => unknown;
  methods?: Record<string, (instance: any, args: Record<string, unknown>) => unknown>;
  statics?: Record<string, (args: Record<string, unknown>) => unknown>;
  encode?: (instance: any) => unknown;
  decode?: (state: unknown) => unknown;
}

export interface HostOptions {
  port?: number;
  bind?: string;
  advertiseHost?: string;
  disabled?: string[];
  forwardTimeoutMs?: number;
}

type Route =
  | { kind: "create"; classname: string }
  | { kind: "static"; classname: string; method: string }
  | { kind: "instance"; classname: string; id: number; method: string };

class HttpFailure extends Error {
  constructor(public readonly status: number, message: string) {
    super(message);
  }
}

function errorDoc(message: string, step?: number): { error: { message: string; step?: number } } {
  const error: { message: string; step?: number } = { message };
  if (step !== undefined) error.step = step;
  return { error };
}

function parseRoute(path: string): Route | null {
  const segments = path.split("?")[0].split("/").filter((s) => s.length > 0);
  if (segments.length === 2) {
    const [classname, tail] = segments;
    if (tail === "new") return { kind: "create", classname };
    if (ID_RE.test(tail)) return null;
    return { kind: "static", classname, method: tail };
  }
  if (segments.length === 3) {
    const [classname, id, method] = segments;
    if (ID_RE.test(id)) return { kind: "instance", classname, id: parseInt(id, 10), method };
  }
  return null;
}

function stepOutputKey(index: number, output: string): string {
  return `step${index}.${output}`;
}

function resolveSource(source: any, context: Record<string, unknown>): unknown {
  let key: string;
  if (source && typeof source === "object" && "input" in source) key = source.input;
  else if (source && typeof source === "object" && "from" in source) {
    key = stepOutputKey(source.from, source.output ?? "");
  } else throw new HttpFailure(500, `malformed binding source: ${JSON.stringify(source)}`);
  if (!(key in context)) throw new HttpFailure(500, `binding source '${key}' has no value`);
  return context[key];
}

function stepTargetUrl(step: any, context: Record<string, unknown>): string {
  const operation = step.operation;
  const inputs = step.inputs ?? {};
  if ("handle" in inputs) {
    const payload = resolveSource(inputs.handle, context) as any;
    const url = payload && typeof payload === "object" ? payload.value : undefined;
    if (typeof url !== "string") {
      throw new HttpFailure(500, `handle binding for step ${operation} is not a handle`);
    }
    return `${url.replace(/\/+$/, "")}/${operation}`;
  }
  const endpoint = String(step.endpoint ?? "").replace(/\/+$/, "");
  if (operation === "new") return `${endpoint}/${step.service}/new`;
  return `${endpoint}/${step.service}/${operation}`;
}

export class ServiceHost {
  readonly store: InstanceStore;
  private readonly classes = new Map<string, ServiceClassDef>();
  private readonly disabled: Set<string>;
  private readonly server: http.Server;
  private readonly locks = new Map<string, Promise<unknown>>();
  private readonly forwardTimeoutMs: number;
  private bound?: { port: number; base: string };
  private readonly opts: HostOptions;

  constructor(classes: ServiceClassDef[], storeDir: string, opts: HostOptions = {}) {
    this.store = new InstanceStore(storeDir);
    for (const def of classes) this.classes.set(def.name, def);
    this.disabled = new Set(opts.disabled ?? []);
    this.forwardTimeoutMs = opts.forwardTimeoutMs ?? 60_000;
    this.opts = opts;
    this.server = http.createServer((req, res) => void this.onRequest(req, res));
  }

  get baseUrl(): string {
    if (!this.bound) throw new Error("host is not started");
    return this.bound.base;
  }

  start(): Promise<void> {
    const bind = this.opts.bind ?? "127.0.0.1";
    return new Promise((resolve) => {
      this.server.listen(this.opts.port ?? 0, bind, () => {
        const port = (this.server.address() as AddressInfo).port;
        const host = this.opts.advertiseHost ?? bind;
        this.bound = { port, base: `http://${host}:${port}` };
        resolve();
      });
    });
  }

  stop(): Promise<void> {
    this.server.closeAllConnections?.();
    return new Promise((resolve, reject) => {
      this.server.close((err) => (err ? reject(err) : resolve()));
    });
  }

  private async onRequest(req: http.IncomingMessage, res: http.ServerResponse): Promise<void> {
    if (req.method !== "POST") {
      this.respond(res, 405, errorDoc("only POST is supported"));
      return;
    }
    const chunks: Buffer[] = [];
    for await (const chunk of req) chunks.push(chunk as Buffer);
    let body: unknown;
    try {
      const raw = Buffer.concat(chunks).toString("utf-8");
      body = raw.length ? JSON.parse(raw) : null;
    } catch {
      this.respond(res, 400, errorDoc("request body is not valid JSON"));
      return;
    }
    if (body === null) {
      this.respond(res, 400, errorDoc("request body is required"));
      return;
    }
    try {
      const [status, doc] = await this.handleRequest(req.url ?? "/", body);
      this.respond(res, status, doc);
    } catch (err) {
      this.respond(res, 500, errorDoc(`internal error: ${err}`));
    }
  }

  private respond(res: http.ServerResponse, status: number, doc: unknown): void {
    const payload = Buffer.from(JSON.stringify(doc), "utf-8");
    res.writeHead(status, {
      "Content-Type": "application/json",
      "Content-Length": payload.length,
    });
    res.end(payload);
  }

  async handleRequest(path: string, body: unknown): Promise<[number, unknown]> {
    const route = parseRoute(path);
    if (route === null) return [404, errorDoc(`no such route: ${path}`)];
    if (typeof body !== "object" || body === null || Array.isArray(body)) {
      return [400, errorDoc("request body must be a JSON object")];
    }
    const doc = body as Record<string, unknown>;
    if ("composition" in doc) return this.choreographyStep(route, doc);
    try {
      const value = await this.invoke(route, doc.arguments ?? {});
      return [200, { result: encodeValue(value) }];
    } catch (err) {
      if (err instanceof HttpFailure) return [err.status, errorDoc(err.message)];
      throw err;
    }
  }

  private withLock<T>(key: string, fn: () => T): Promise<T> {
    const prev = this.locks.get(key) ?? Promise.resolve();
    const run = prev.then(fn, fn);
    this.locks.set(key, run.catch(() => undefined));
    return run;
  }

  private async invoke(route: Route, argsDoc: unknown): Promise<unknown> {
    const def = this.classes.get(route.classname);
    if (!def) throw new HttpFailure(404, `unknown class: ${route.classname}`);
    if (this.disabled.has(route.classname)) {
      throw new HttpFailure(403, `class is disabled: ${route.classname}`);
    }
    let args: Record<string, unknown>;
    try {
      args = decodeArguments(argsDoc);
    } catch (err) {
      if (err instanceof PayloadError) throw new HttpFailure(400, `malformed arguments: ${err.message}`);
      throw err;
    }

    if (route.kind === "create") {
      if (!def.factory) throw new HttpFailure(404, `class ${route.classname} has no constructor`);
      const instance = this.run(route.classname, "new", () => def.factory!(args));
      const id = this.store.allocate(route.classname);
      this.store.save(route.classname, id, {
        class: route.classname,
        state: (def.encode ?? ((o: any) => o.encodeState()))(instance),
      });
      return new Handle(`${this.baseUrl}/${route.classname}/${id}`);
    }

    if (route.kind === "static") {
      const fn = def.statics?.[route.method];
      if (!fn) throw new HttpFailure(404, `unknown static operation: ${route.classname}/${route.method}`);
      return this.run(route.classname, route.method, () => fn(args));
    }

    const method = def.methods?.[route.method];
    if (!method) throw new HttpFailure(404, `unknown operation: ${route.classname}/${route.method}`);
    return this.withLock(`${route.classname}.${route.id}`, () => {
      const doc = this.store.load(route.classname, route.id);
      if (doc === null) {
        throw new HttpFailure(404, `unknown instance: ${route.classname}/${route.id}`);
      }
      const instance = (def.decode ?? ((s: unknown) => s))(doc.state);
      const value = this.run(route.classname, route.method, () => method(instance, args));
      this.store.save(route.classname, route.id, {
        class: route.classname,
        state: (def.encode ?? ((o: any) => o.encodeState()))(instance),
      });
      return value;
    });
  }

  private run<T>(classname: string, method: string, call: () => T): T {
    try {
      return call();
    } catch (err) {
      if (err instanceof ConflictError) {
        throw new HttpFailure(409, `${classname}/${method}: ${err.message}`);
      }
      if (err instanceof PayloadError) {
        throw new HttpFailure(400, `${classname}/${method}: ${err.message}`);
      }
      if (err instanceof HttpFailure) throw err;
      throw new HttpFailure(500, `${classname}/${method} failed: ${err}`);
    }
  }

  private async choreographyStep(
    route: Route, body: Record<string, unknown>,
  ): Promise<[number, unknown]> {
    const comp = body.composition as any;
    const steps = comp && typeof comp === "object" ? comp.steps : undefined;
    const index = (body.stepIndex ?? 0) as number;
    const context = body.arguments as Record<string, unknown>;
    if (!Array.isArray(steps) || !Number.isInteger(index)
        || typeof context !== "object" || context === null) {
      return [400, errorDoc("malformed choreography request")];
    }
    if (index < 0 || index >= steps.length) {
      return [400, errorDoc(`stepIndex ${index} out of range`)];
    }
    const step = steps[index];
    const expectedOp = route.kind === "create" ? "new" : route.method;
    if (step.service !== route.classname || step.operation !== expectedOp) {
      return [400, errorDoc(
        `target ${route.classname}/${expectedOp} does not match composition step ${index}`)];
    }

    let argsDoc: Record<string, unknown>;
    try {
      argsDoc = {};
      for (const [name, source] of Object.entries(step.inputs ?? {})) {
        if (name === "handle") continue; // the handle addressed this request
        argsDoc[name] = resolveSource(source, context);
      }
    } catch (err) {
      if (err instanceof HttpFailure) return [500, errorDoc(err.message, index)];
      throw err;
    }

    let value: unknown;
    try {
      value = await this.invoke(route, argsDoc);
    } catch (err) {
      if (err instanceof HttpFailure) return [err.status, errorDoc(err.message, index)];
      throw err;
    }

    if (step.output) context[stepOutputKey(index, step.output)] = encodeValue(value);
    if (index === steps.length - 1) return [200, { result: encodeValue(value) }];

    const nextStep = steps[index + 1];
    let url: string;
    try {
      url = stepTargetUrl(nextStep, context);
    } catch (err) {
      if (err instanceof HttpFailure) return [502, errorDoc(err.message, index + 1)];
      throw err;
    }
    try {
      const response = await fetch(url, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ arguments: context, composition: comp, stepIndex: index + 1 }),
        signal: AbortSignal.timeout(this.forwardTimeoutMs),
      });
      const downstream = await response.json();
      return [response.status, downstream];
    } catch (err) {
      return [502, errorDoc(`next hop unreachable: POST ${url} failed: ${err}`, index + 1)];
    }
  }
}

export function defaultClasses(): ServiceClassDef[] {
  const learners = require("./learners") as typeof import("./learners");
  return [
    {
      name: "gnb",
      factory: () => new learners.GaussianNaiveBayes(),
      methods: {
        train: (o, a) => o.train(a.features as number[][], a.labels as string[]),
        predict: (o, a) => o.predict(a.features as number[][]),
      },
      encode: (o) => o.encodeState(),
      decode: (s) => learners.GaussianNaiveBayes.decodeState(s),
    },
    {
      name: "knn3",
      factory: () => new learners.ThreeNearestNeighbors(),
      methods: {
        train: (o, a) => o.train(a.features as number[][], a.labels as string[]),
        predict: (o, a) => o.predict(a.features as number[][]),
      },
      encode: (o) => o.encodeState(),
      decode: (s) => learners.ThreeNearestNeighbors.decodeState(s),
    },
    {
      name: "echo",
      statics: { echo: (a) => learners.echo(a.value) },
    },
  ];
}
