/**
 * Transports carry protocol lines between the client and the server.
 *
 * - TcpTransport speaks the line protocol directly over a socket (used by
 *   the test suite and any node-side tooling).
 * - WsTransport speaks it through a WebSocket, one or more lines per text
 *   message, for browsers that cannot open raw sockets; pair it with the
 *   bundled bridge (`npm run bridge`).
 *
 * Both buffer partial data and deliver complete, newline-terminated lines.
 */

import net from "node:net";
import type { Transport } from "./client.js";

/** Split buffered text into complete lines, returning the unfinished tail. */
function drainLines(buffer: string, deliver: (line: string) => void): string {
  let start = 0;
  for (;;) {
    const nl = buffer.indexOf("\n", start);
    if (nl === -1) {
      return buffer.slice(start);
    }
    deliver(buffer.slice(start, nl + 1));
    start = nl + 1;
  }
}

export class TcpTransport implements Transport {
  onLine: ((line: string) => void) | null = null;
  onClose: (() => void) | null = null;

  private buffer = "";
  private closed = false;

  private constructor(private readonly socket: net.Socket) {
    socket.setNoDelay(true);
    socket.on("data", (chunk: Buffer) => {
      this.buffer = drainLines(this.buffer + chunk.toString("utf8"), (line) =>
        this.onLine?.(line),
      );
    });
    const closeOnce = () => {
      if (!this.closed) {
        this.closed = true;
        this.onClose?.();
      }
    };
    socket.on("close", closeOnce);
    socket.on("error", () => socket.destroy());
  }

  static connect(host: string, port: number): Promise<TcpTransport> {
    return new Promise((resolve, reject) => {
      const socket = net.connect({ host, port });
      socket.once("connect", () => resolve(new TcpTransport(socket)));
      socket.once("error", (err) => reject(err));
    });
  }

  send(text: string): void {
    if (this.closed || this.socket.destroyed) {
      throw new Error("transport closed");
    }
    this.socket.write(text);
  }

  close(): void {
    this.socket.end();
    this.socket.destroy();
  }
}

/**
 * The subset of the WHATWG WebSocket interface we need; both the browser
 * global and the `ws` package's WebSocket satisfy it.
 */
export interface WebSocketLike {
  readonly readyState: number;
  send(data: string): void;
  close(): void;
  addEventListener(type: "open" | "message" | "close" | "error", listener: (event: any) => void): void;
}

export type WebSocketFactory = (url: string) => WebSocketLike;

const WS_OPEN = 1;

export class WsTransport implements Transport {
  onLine: ((line: string) => void) | null = null;
  onClose: (() => void) | null = null;

  private buffer = "";
  private closed = false;

  private constructor(private readonly ws: WebSocketLike) {
    ws.addEventListener("message", (event: { data: unknown }) => {
      const text = typeof event.data === "string" ? event.data : String(event.data);
      this.buffer = drainLines(this.buffer + text, (line) => this.onLine?.(line));
    });
    const closeOnce = () => {
      if (!this.closed) {
        this.closed = true;
        this.onClose?.();
      }
    };
    ws.addEventListener("close", closeOnce);
    ws.addEventListener("error", closeOnce);
  }

  /**
   * Open ws://host:port/ and resolve once connected. Pass a factory to use
   * a non-global WebSocket implementation (e.g. the `ws` package in node).
   */
  static connect(url: string, factory?: WebSocketFactory): Promise<WsTransport> {
    const make =
      factory ??
      ((u: string) => {
        const ctor = (globalThis as { WebSocket?: new (url: string) => WebSocketLike }).WebSocket;
        if (ctor === undefined) {
          throw new Error("no WebSocket implementation available");
        }
        return new ctor(u);
      });
    return new Promise((resolve, reject) => {
      const ws = make(url);
      ws.addEventListener("open", () => resolve(new WsTransport(ws)));
      ws.addEventListener("error", (event: { message?: string }) =>
        reject(new Error(event?.message ?? "websocket connect failed")),
      );
    });
  }

  send(text: string): void {
    if (this.closed || this.ws.readyState !== WS_OPEN) {
      throw new Error("transport closed");
    }
    this.ws.send(text);
  }

  close(): void {
    this.closed = true;
    this.ws.close();
  }
}
