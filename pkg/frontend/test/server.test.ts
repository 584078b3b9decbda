import * as assert from "node:assert/strict";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { after, before, test } from "node:test";

import { ServiceHost, defaultClasses } from "../src/server";

let host: ServiceHost;
let store: string;

async function post(pathname: string, body: unknown): Promise<{ status: number; doc: any }> {
  const response = await fetch(`${host.baseUrl}${pathname}`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  return { status: response.status, doc: await response.json() };
}

const FEATURES = { type: "matrix", value: [[0.0, 0.0], [1.0, 1.0], [5.0, 5.0], [6.0, 6.0]] };
const LABELS = { type: "labels", value: ["a", "a", "b", "b"] };

before(async () => {
  store = fs.mkdtempSync(path.join(os.tmpdir(), "ts-host-"));
  host = new ServiceHost(defaultClasses(), store, { port: 0 });
  await host.start();
});

after(async () => {
  await host.stop();
});

test("create returns sequential handle URLs", async () => {
  const first = await post("/gnb/new", { arguments: {} });
  assert.equal(first.status, 200);
  assert.equal(first.doc.result.value, `${host.baseUrl}/gnb/0`);
  const second = await post("/gnb/new", { arguments: {} });
  assert.equal(second.doc.result.value, `${host.baseUrl}/gnb/1`);
});

test("train then predict round-trips through the store", async () => {
  const { doc } = await post("/knn3/new", { arguments: {} });
  const handle = new URL(doc.result.value).pathname;
  const trained = await post(`${handle}/train`, { arguments: { features: FEATURES, labels: LABELS } });
  assert.equal(trained.status, 200);
  const predicted = await post(`${handle}/predict`, {
    arguments: { features: { type: "matrix", value: [[0.2, 0.2], [5.5, 5.5]] } },
  });
  assert.equal(predicted.status, 200);
  assert.deepEqual(predicted.doc.result, { type: "labels", value: ["a", "b"] });
  // store layout: instance file plus counter file
  assert.ok(fs.existsSync(path.join(store, "knn3.0")));
  assert.ok(fs.existsSync(path.join(store, "knn3.counter")));
});

test("status codes match the contract", async () => {
  assert.equal((await post("/nosuch/new", { arguments: {} })).status, 404);
  assert.equal((await post("/gnb/0/teleport", { arguments: {} })).status, 404);
  assert.equal((await post("/gnb/99/predict", { arguments: { features: FEATURES } })).status, 404);
  assert.equal((await post("/gnb/new", { arguments: { x: { type: "tensor" } } })).status, 400);
  const conflict = await post("/gnb/new", { arguments: {} });
  const handle = new URL(conflict.doc.result.value).pathname;
  assert.equal((await post(`${handle}/predict`, { arguments: { features: FEATURES } })).status, 409);
  const raw = await fetch(`${host.baseUrl}/gnb/new`, { method: "GET" });
  assert.equal(raw.status, 405);
});

test("disabled classes answer 403", async () => {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "ts-disabled-"));
  const other = new ServiceHost(defaultClasses(), dir, { port: 0, disabled: ["echo"] });
  await other.start();
  try {
    const response = await fetch(`${other.baseUrl}/echo/echo`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ arguments: {} }),
    });
    assert.equal(response.status, 403);
  } finally {
    await other.stop();
  }
});

test("instances survive a host restart over the same store", async () => {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "ts-durable-"));
  const first = new ServiceHost(defaultClasses(), dir, { port: 0 });
  await first.start();
  const created = await fetch(`${first.baseUrl}/gnb/new`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ arguments: {} }),
  });
  const handlePath = new URL((await created.json() as any).result.value).pathname;
  await fetch(`${first.baseUrl}${handlePath}/train`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify({ arguments: { features: FEATURES, labels: LABELS } }),
  });
  await first.stop();

  const revived = new ServiceHost(defaultClasses(), dir, { port: 0 });
  await revived.start();
  try {
    const predicted = await fetch(`${revived.baseUrl}${handlePath}/predict`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ arguments: { features: { type: "matrix", value: [[0.1, 0.1]] } } }),
    });
    assert.equal(predicted.status, 200);
    assert.deepEqual((await predicted.json() as any).result, { type: "labels", value: ["a"] });
  } finally {
    await revived.stop();
  }
});

test("single-host choreography executes all steps", async () => {
  const comp = {
    steps: [
      { service: "gnb", operation: "new", endpoint: host.baseUrl, inputs: {}, output: "handle" },
      {
        service: "gnb", operation: "train", endpoint: host.baseUrl,
        inputs: {
          handle: { from: 0, output: "handle" },
          features: { input: "features" }, labels: { input: "labels" },
        },
        output: null,
      },
      {
        service: "gnb", operation: "predict", endpoint: host.baseUrl,
        inputs: { handle: { from: 0, output: "handle" }, features: { input: "queries" } },
        output: "predictions",
      },
    ],
  };
  const { status, doc } = await post("/gnb/new", {
    arguments: {
      features: FEATURES, labels: LABELS,
      queries: { type: "matrix", value: [[0.3, 0.3], [5.2, 5.2]] },
    },
    composition: comp,
    stepIndex: 0,
  });
  assert.equal(status, 200);
  assert.deepEqual(doc.result, { type: "labels", value: ["a", "b"] });
});

test("unreachable next hop answers 502 with the failing step", async () => {
  const comp = {
    steps: [
      { service: "gnb", operation: "new", endpoint: host.baseUrl, inputs: {}, output: "handle" },
      { service: "knn3", operation: "new", endpoint: "http://127.0.0.1:9", inputs: {}, output: "h2" },
    ],
  };
  const { status, doc } = await post("/gnb/new", { arguments: {}, composition: comp, stepIndex: 0 });
  assert.equal(status, 502);
  assert.equal(doc.error.step, 1);
});
