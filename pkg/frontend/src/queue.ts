/**
 * Offline-first event queue. While the network is down, reading events pile
 * up here in arrival order; on reconnect they flush strictly in order, and a
 * mid-flush failure leaves the remainder queued in the same order for the
 * next attempt.
 */

import type { ReadingEvent } from "./types";

export interface QueuedEvent {
  sessionId: string;
  event: ReadingEvent;
}

export type EventPoster = (sessionId: string, event: ReadingEvent) => Promise<unknown>;

export class OfflineEventQueue {
  private pending: QueuedEvent[] = [];
  private flushing = false;

  constructor(private readonly post: EventPoster) {}

  get size(): number {
    return this.pending.length;
  }

  snapshot(): QueuedEvent[] {
    return [...this.pending];
  }

  enqueue(sessionId: string, event: ReadingEvent): void {
    this.pending.push({ sessionId, event });
  }

  /**
   * Post queued events in order. Returns how many were delivered. Stops at
   * the first failure so ordering is preserved across retries; a re-entrant
   * call while a flush runs is a no-op.
   */
  async flush(): Promise<number> {
    if (this.flushing) {
      return 0;
    }
    this.flushing = true;
    let delivered = 0;
    try {
      while (this.pending.length > 0) {
        const head = this.pending[0];
        try {
          await this.post(head.sessionId, head.event);
        } catch {
          break;
        }
        this.pending.shift();
        delivered += 1;
      }
    } finally {
      this.flushing = false;
    }
    return delivered;
  }
}
