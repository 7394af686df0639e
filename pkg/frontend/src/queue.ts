/**
 * FIFO retry queue for submissions that never reached the server.
 *
 * Backed by browser storage so it survives reloads. An item leaves the
 * queue only on a confirmed server answer: 2xx (delivered) or 4xx
 * (rejected — surfaced to the caller, never silently dropped). Network
 * failures and 5xx stop the drain and keep the remainder queued.
 */

import { ApiError, NetworkError } from "./client.js";
import type { CaptureSubmission } from "./types.js";

const STORAGE_KEY = "platekeeper_pending_queue_v1";

export interface RejectedItem {
  submission: CaptureSubmission;
  code: string;
  message: string;
}

export interface DrainReport {
  delivered: number;
  rejected: RejectedItem[];
  remaining: number;
}

export class PendingQueue {
  constructor(private storage: Storage) {}

  list(): CaptureSubmission[] {
    try {
      const raw = this.storage.getItem(STORAGE_KEY);
      return raw ? (JSON.parse(raw) as CaptureSubmission[]) : [];
    } catch {
      return [];
    }
  }

  get length(): number {
    return this.list().length;
  }

  enqueue(submission: CaptureSubmission): void {
    const items = this.list();
    items.push(submission);
    this.save(items);
  }

  async drain(send: (submission: CaptureSubmission) => Promise<unknown>): Promise<DrainReport> {
    const report: DrainReport = { delivered: 0, rejected: [], remaining: 0 };
    let items = this.list();
    while (items.length > 0) {
      const head = items[0]!;
      try {
        await send(head);
        report.delivered += 1;
      } catch (err) {
        if (err instanceof ApiError && err.status >= 400 && err.status < 500) {
          report.rejected.push({ submission: head, code: err.code, message: err.message });
        } else if (err instanceof NetworkError || err instanceof ApiError) {
          break; // still unreachable (or server-side trouble): keep it queued
        } else {
          throw err;
        }
      }
      items = items.slice(1);
      this.save(items);
    }
    report.remaining = items.length;
    return report;
  }

  private save(items: CaptureSubmission[]): void {
    try {
      this.storage.setItem(STORAGE_KEY, JSON.stringify(items));
    } catch {
      // storage full or unavailable: the in-memory flow still works
    }
  }
}
