// Golden-corpus conformance: replay every recorded request, in order, against
// a fresh host and require the exact status code plus a semantically equal
// body: result payloads must deep-equal after normalizing this host's base
// URL back to the $HOST placeholder; error bodies must carry a message, and
// the failing step index must match when the recording has one.

import * as assert from "node:assert/strict";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { after, before, test } from "node:test";

import { ServiceHost, defaultClasses } from "../src/server";

const CORPUS = path.resolve(__dirname, "../../conformance/corpus.json");

interface Entry {
  method: string;
  path: string;
  body: unknown;
  expect: { status: number; body: any };
}

let host: ServiceHost;

before(async () => {
  const corpus = JSON.parse(fs.readFileSync(CORPUS, "utf-8"));
  const store = fs.mkdtempSync(path.join(os.tmpdir(), "ts-conf-"));
  host = new ServiceHost(defaultClasses(), store, {
    port: 0,
    disabled: corpus.server.disabled,
  });
  await host.start();
});

after(async () => {
  await host.stop();
});

function substituteHost(value: unknown): unknown {
  if (typeof value === "string") return value.replaceAll("$HOST", host.baseUrl);
  if (Array.isArray(value)) return value.map(substituteHost);
  if (value && typeof value === "object") {
    return Object.fromEntries(Object.entries(value).map(([k, v]) => [k, substituteHost(v)]));
  }
  return value;
}

function normalizeHost(value: unknown): unknown {
  if (typeof value === "string") return value.replaceAll(host.baseUrl, "$HOST");
  if (Array.isArray(value)) return value.map(normalizeHost);
  if (value && typeof value === "object") {
    return Object.fromEntries(Object.entries(value).map(([k, v]) => [k, normalizeHost(v)]));
  }
  return value;
}

function assertSemanticallyEqual(expected: any, actual: any, context: string): void {
  if (expected && typeof expected === "object" && "error" in expected) {
    assert.ok(actual && typeof actual === "object" && "error" in actual,
      `${context}: expected an error body, got ${JSON.stringify(actual)}`);
    assert.equal(typeof actual.error.message, "string", `${context}: error message missing`);
    assert.ok(actual.error.message.length > 0, `${context}: error message empty`);
    if ("step" in expected.error) {
      assert.equal(actual.error.step, expected.error.step, `${context}: failing step differs`);
    }
    return;
  }
  assert.deepEqual(normalizeHost(actual), expected, `${context}: result bodies differ`);
}

test("the golden corpus replays byte-compatibly", async () => {
  const corpus = JSON.parse(fs.readFileSync(CORPUS, "utf-8"));
  const entries: Entry[] = corpus.entries;
  assert.ok(entries.length >= 15);
  for (const [index, entry] of entries.entries()) {
    const context = `entry ${index}: ${entry.method} ${entry.path}`;
    const url = `${host.baseUrl}${entry.path}`;
    const init: RequestInit = { method: entry.method };
    if (entry.body !== null) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(substituteHost(entry.body));
    }
    const response = await fetch(url, init);
    const body = await response.json();
    assert.equal(response.status, entry.expect.status,
      `${context}: status ${response.status}, recorded ${entry.expect.status} `
      + `(body: ${JSON.stringify(body)})`);
    assertSemanticallyEqual(entry.expect.body, body, context);
  }
});
