// The two learners this host contributes to the portfolio. Both are
// deterministic given their training data: distance ties break toward the
// lowest training index, vote ties toward the closest tied label, and
// Gaussian score ties toward the class seen earliest in training order.

import { ConflictError } from "./payload";

export const VARIANCE_FLOOR = 1e-9;

function checkMatrix(features: number[][], dim?: number): number {
  if (!Array.isArray(features) || features.length === 0) {
    throw new Error("features must be a non-empty matrix");
  }
  const width = dim ?? features[0].length;
  for (const row of features) {
    if (row.length !== width) {
      throw new Error(`feature row has ${row.length} attributes, expected ${width}`);
    }
  }
  return width;
}

function sqDist(a: number[], b: number[]): number {
  let total = 0;
  for (let i = 0; i < a.length; i++) {
    const d = a[i] - b[i];
    total += d * d;
  }
  return total;
}

export class GaussianNaiveBayes {
  classes: string[] | null = null;
  priors: number[] = [];
  means: number[][] = [];
  variances: number[][] = [];

  train(features: number[][], labels: string[]): null {
    const dim = checkMatrix(features);
    if (labels.length !== features.length) {
      throw new Error("features and labels disagree on length");
    }
    const classes: string[] = [];
    for (const y of labels) if (!classes.includes(y)) classes.push(y);
    this.classes = classes;
    this.priors = [];
    this.means = [];
    this.variances = [];
    const n = labels.length;
    for (const y of classes) {
      const rows = features.filter((_, i) => labels[i] === y);
      const count = rows.length;
      this.priors.push(count / n);
      const means: number[] = [];
      const variances: number[] = [];
      for (let j = 0; j < dim; j++) {
        let sum = 0;
        for (const row of rows) sum += row[j];
        const mean = sum / count;
        let sq = 0;
        for (const row of rows) sq += (row[j] - mean) ** 2;
        means.push(mean);
        variances.push(Math.max(sq / count, VARIANCE_FLOOR));
      }
      this.means.push(means);
      this.variances.push(variances);
    }
    return null;
  }

  predict(features: number[][]): string[] {
    if (this.classes === null) throw new ConflictError("predict before train");
    checkMatrix(features, this.means[0].length);
    return features.map((row) => {
      let bestClass = 0;
      let bestLp = this.logJoint(row, 0);
      for (let c = 1; c < this.classes!.length; c++) {
        const lp = this.logJoint(row, c);
        if (lp > bestLp) {
          bestLp = lp;
          bestClass = c;
        }
      }
      return this.classes![bestClass];
    });
  }

  private logJoint(row: number[], c: number): number {
    let lp = Math.log(this.priors[c]);
    for (let j = 0; j < row.length; j++) {
      const variance = this.variances[c][j];
      lp += -0.5 * Math.log(2 * Math.PI * variance)
        - (row[j] - this.means[c][j]) ** 2 / (2 * variance);
    }
    return lp;
  }

  encodeState(): unknown {
    return {
      classes: this.classes,
      priors: this.priors,
      means: this.means,
      variances: this.variances,
    };
  }

  static decodeState(doc: any): GaussianNaiveBayes {
    const obj = new GaussianNaiveBayes();
    obj.classes = doc?.classes ?? null;
    obj.priors = doc?.priors ?? [];
    obj.means = doc?.means ?? [];
    obj.variances = doc?.variances ?? [];
    return obj;
  }
}

export class ThreeNearestNeighbors {
  features: number[][] | null = null;
  labels: string[] | null = null;

  train(features: number[][], labels: string[]): null {
    checkMatrix(features);
    if (labels.length !== features.length) {
      throw new Error("features and labels disagree on length");
    }
    this.features = features.map((row) => [...row]);
    this.labels = [...labels];
    return null;
  }

  predict(features: number[][]): string[] {
    if (this.features === null || this.labels === null) {
      throw new ConflictError("predict before train");
    }
    checkMatrix(features, this.features[0].length);
    const k = Math.min(3, this.features.length);
    return features.map((row) => {
      const order = this.features!
        .map((train, i) => ({ d: sqDist(row, train), i }))
        .sort((a, b) => (a.d - b.d) || (a.i - b.i))
        .slice(0, k)
        .map((e) => e.i);
      const votes = new Map<string, number>();
      for (const i of order) {
        const y = this.labels![i];
        votes.set(y, (votes.get(y) ?? 0) + 1);
      }
      const top = Math.max(...votes.values());
      for (const i of order) {
        if (votes.get(this.labels![i]) === top) return this.labels![i];
      }
      return this.labels![order[0]];
    });
  }

  encodeState(): unknown {
    return { features: this.features, labels: this.labels };
  }

  static decodeState(doc: any): ThreeNearestNeighbors {
    const obj = new ThreeNearestNeighbors();
    obj.features = doc?.features ?? null;
    obj.labels = doc?.labels ?? null;
    return obj;
  }
}

export function echo(value: unknown): unknown {
  return value ?? null;
}
