// On-disk instance store, layout-compatible with the primary host:
// one JSON file per instance `{classname}.{id}` plus `{classname}.counter`
// holding the next id. Writes are temp-file + rename, so a killed process
// never leaves a torn instance file.

import * as fs from "node:fs";
import * as path from "node:path";

export interface InstanceDoc {
  class: string;
  state: unknown;
}

export class InstanceStore {
  constructor(private readonly directory: string) {
    fs.mkdirSync(directory, { recursive: true });
  }

  private instancePath(classname: string, id: number): string {
    return path.join(this.directory, `${classname}.${id}`);
  }

  private counterPath(classname: string): string {
    return path.join(this.directory, `${classname}.counter`);
  }

  allocate(classname: string): number {
    const counter = this.counterPath(classname);
    const next = fs.existsSync(counter) ? parseInt(fs.readFileSync(counter, "utf-8"), 10) : 0;
    this.writeAtomic(counter, String(next + 1));
    return next;
  }

  save(classname: string, id: number, doc: InstanceDoc): void {
    this.writeAtomic(this.instancePath(classname, id), JSON.stringify(doc));
  }

  load(classname: string, id: number): InstanceDoc | null {
    const file = this.instancePath(classname, id);
    if (!fs.existsSync(file)) return null;
    return JSON.parse(fs.readFileSync(file, "utf-8")) as InstanceDoc;
  }

  private writeAtomic(file: string, text: string): void {
    const tmp = `${file}.tmp`;
    fs.writeFileSync(tmp, text);
    fs.renameSync(tmp, file);
  }
}
