/**
 * Client-side session state. Everything lives in memory; a reload starts a
 * fresh session and only unexported renders are lost.
 */

import type { ControlFeatures } from "./api.js";

export const HISTORY_LIMIT = 12;

export interface ResultEntry<T> {
  id: number;
  zLabel: string;
  seed: number;
  payload: T;
}

/** Rolling render history, oldest evicted past HISTORY_LIMIT. */
export class ResultHistory<T> {
  private entries: ResultEntry<T>[] = [];
  private nextId = 1;

  /** Called with each evicted entry so owners can release blob URLs. */
  onEvict: ((entry: ResultEntry<T>) => void) | null = null;

  add(zLabel: string, seed: number, payload: T): ResultEntry<T> {
    const entry = { id: this.nextId++, zLabel, seed, payload };
    this.entries.push(entry);
    while (this.entries.length > HISTORY_LIMIT) {
      const evicted = this.entries.shift();
      if (evicted && this.onEvict) this.onEvict(evicted);
    }
    return entry;
  }

  remove(id: number): void {
    const idx = this.entries.findIndex((e) => e.id === id);
    if (idx >= 0) this.entries.splice(idx, 1);
  }

  /** Newest first, for display. */
  list(): ResultEntry<T>[] {
    return [...this.entries].reverse();
  }

  get size(): number {
    return this.entries.length;
  }
}

export interface GuidingClip {
  name: string;
  wavBase64: string;
  features: ControlFeatures;
}
