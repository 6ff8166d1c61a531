import { describe, expect, it } from "vitest";

import { OfflineEventQueue } from "../src/queue";
import type { ReadingEvent } from "../src/types";

function pageView(sectionId: string, minute: number): ReadingEvent {
  return {
    type: "page_view",
    section_id: sectionId,
    t: `2026-08-01T20:${String(minute).padStart(2, "0")}:00+00:00`,
  };
}

describe("offline event queue", () => {
  it("flushes strictly in enqueue order", async () => {
    const delivered: string[] = [];
    const queue = new OfflineEventQueue(async (_sid, event) => {
      delivered.push((event as { section_id: string }).section_id);
    });
    for (const [index, section] of ["cover", "intro", "challenge"].entries()) {
      queue.enqueue("session-1", pageView(section, index + 1));
    }
    const count = await queue.flush();
    expect(count).toBe(3);
    expect(delivered).toEqual(["cover", "intro", "challenge"]);
    expect(queue.size).toBe(0);
  });

  it("a mid-flush failure keeps the remainder in order", async () => {
    const delivered: string[] = [];
    let failOn: string | null = "intro";
    const queue = new OfflineEventQueue(async (_sid, event) => {
      const section = (event as { section_id: string }).section_id;
      if (section === failOn) {
        throw new Error("still offline");
      }
      delivered.push(section);
    });
    for (const [index, section] of ["cover", "intro", "challenge"].entries()) {
      queue.enqueue("session-1", pageView(section, index + 1));
    }
    expect(await queue.flush()).toBe(1);
    expect(queue.size).toBe(2);
    expect(queue.snapshot().map((q) => (q.event as { section_id: string }).section_id))
      .toEqual(["intro", "challenge"]);

    failOn = null;
    expect(await queue.flush()).toBe(2);
    expect(delivered).toEqual(["cover", "intro", "challenge"]);
  });

  it("a re-entrant flush is a no-op", async () => {
    let resolveFirst: () => void = () => undefined;
    const gate = new Promise<void>((resolve) => {
      resolveFirst = resolve;
    });
    const queue = new OfflineEventQueue(async () => {
      await gate;
    });
    queue.enqueue("session-1", pageView("cover", 1));
    const first = queue.flush();
    const second = await queue.flush();
    expect(second).toBe(0);
    resolveFirst();
    expect(await first).toBe(1);
  });
});
