// Incremental parser for text/event-stream bodies. Feed raw chunks, get typed
// events out; comment lines (keepalives) are dropped.

import type { ServerEvent } from "./types.js";

export class SseParser {
  private buffer = "";
  private eventType: string | null = null;
  private dataLines: string[] = [];

  feed(chunk: string): ServerEvent[] {
    this.buffer += chunk;
    const events: ServerEvent[] = [];
    let index;
    while ((index = this.buffer.indexOf("\n")) >= 0) {
      const line = this.buffer.slice(0, index).replace(/\r$/, "");
      this.buffer = this.buffer.slice(index + 1);
      const event = this.line(line);
      if (event !== null) {
        events.push(event);
      }
    }
    return events;
  }

  private line(line: string): ServerEvent | null {
    if (line === "") {
      return this.dispatch();
    }
    if (line.startsWith(":")) {
      return null; // keepalive comment
    }
    if (line.startsWith("event:")) {
      this.eventType = line.slice("event:".length).trim();
      return null;
    }
    if (line.startsWith("data:")) {
      this.dataLines.push(line.slice("data:".length).trim());
      return null;
    }
    return null;
  }

  private dispatch(): ServerEvent | null {
    if (this.eventType === null && this.dataLines.length === 0) {
      return null;
    }
    const type = this.eventType ?? "message";
    const raw = this.dataLines.join("\n") || "{}";
    this.eventType = null;
    this.dataLines = [];
    let data: unknown;
    try {
      data = JSON.parse(raw);
    } catch {
      return null; // malformed payloads are dropped, the stream continues
    }
    return { type, data } as ServerEvent;
  }
}
