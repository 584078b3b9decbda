// Tagged wire values shared with the primary host: {"type": ..., "value": ...}.
// Kinds: number, string, boolean, matrix (equal-length numeric rows),
// labels (strings), handle (instance URL), null.

export class PayloadError extends Error {}

export class ConflictError extends Error {}

export class Handle {
  constructor(public readonly url: string) {}
}

export type Payload =
  | { type: "null" }
  | { type: "number"; value: number }
  | { type: "string"; value: string }
  | { type: "boolean"; value: boolean }
  | { type: "matrix"; value: number[][] }
  | { type: "labels"; value: string[] }
  | { type: "handle"; value: string };

function isNumber(x: unknown): x is number {
  return typeof x === "number" && Number.isFinite(x);
}

function checkMatrix(rows: unknown): number[][] {
  if (!Array.isArray(rows)) throw new PayloadError(`matrix payload carries ${JSON.stringify(rows)}`);
  let width: number | null = null;
  for (let i = 0; i < rows.length; i++) {
    const row = rows[i];
    if (!Array.isArray(row)) throw new PayloadError("matrix payload rows must be lists");
    if (width === null) width = row.length;
    else if (row.length !== width) {
      throw new PayloadError(`matrix row ${i} has length ${row.length}, expected ${width}`);
    }
    for (let j = 0; j < row.length; j++) {
      if (!isNumber(row[j])) throw new PayloadError(`matrix cell [${i}][${j}] is not a number`);
    }
  }
  return rows as number[][];
}

export function encodeValue(value: unknown): Payload {
  if (value === null || value === undefined) return { type: "null" };
  if (typeof value === "boolean") return { type: "boolean", value };
  if (isNumber(value)) return { type: "number", value };
  if (typeof value === "string") return { type: "string", value };
  if (value instanceof Handle) return { type: "handle", value: value.url };
  if (Array.isArray(value)) {
    if (value.every((x) => typeof x === "string")) return { type: "labels", value: value as string[] };
    if (value.every((x) => Array.isArray(x))) {
      return { type: "matrix", value: checkMatrix(value) };
    }
    throw new PayloadError("list value is neither labels nor a matrix");
  }
  throw new PayloadError(`value has no payload encoding: ${JSON.stringify(value)}`);
}

export function decodeValue(doc: unknown): unknown {
  if (typeof doc !== "object" || doc === null || !("type" in doc)) {
    throw new PayloadError(`not a tagged payload: ${JSON.stringify(doc)}`);
  }
  const tagged = doc as { type: string; value?: unknown };
  const { type } = tagged;
  if (type === "null") return null;
  if (!("value" in tagged)) throw new PayloadError(`payload of type ${type} is missing a value`);
  const value = tagged.value;
  switch (type) {
    case "boolean":
      if (typeof value !== "boolean") throw new PayloadError("boolean payload carries a non-boolean");
      return value;
    case "number":
      if (!isNumber(value)) throw new PayloadError("number payload carries a non-number");
      return value;
    case "string":
      if (typeof value !== "string") throw new PayloadError("string payload carries a non-string");
      return value;
    case "handle":
      if (typeof value !== "string" || !value.startsWith("http")) {
        throw new PayloadError("handle payload carries an invalid URL");
      }
      return new Handle(value);
    case "labels":
      if (!Array.isArray(value) || !value.every((x) => typeof x === "string")) {
        throw new PayloadError("labels payload carries non-strings");
      }
      return [...value];
    case "matrix":
      return checkMatrix(value);
    default:
      throw new PayloadError(`unknown payload type: '${type}'`);
  }
}

export function encodeArguments(values: Record<string, unknown>): Record<string, Payload> {
  const out: Record<string, Payload> = {};
  for (const [name, v] of Object.entries(values)) out[name] = encodeValue(v);
  return out;
}

export function decodeArguments(doc: unknown): Record<string, unknown> {
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new PayloadError("arguments must be an object");
  }
  const out: Record<string, unknown> = {};
  for (const [name, v] of Object.entries(doc)) out[name] = decodeValue(v);
  return out;
}
