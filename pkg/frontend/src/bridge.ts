/**
 * WebSocket-to-TCP bridge.
 *
 * Browsers cannot open raw sockets, so the page connects here over
 * WebSocket and this process pipes each connection to the glove server's
 * TCP line protocol, byte for byte, one TCP connection per WebSocket
 * client. Run next to the server:
 *
 *     signglove serve --port 7600 --calibration glove.cal --model words.dtree
 *     node dist/bridge.js --listen 8787 --target 127.0.0.1:7600
 *
 * then open the UI with ?host=127.0.0.1&port=8787.
 */

import net from "node:net";
import process from "node:process";
import { pathToFileURL } from "node:url";
import { WebSocketServer, type WebSocket } from "ws";

interface BridgeArgs {
  listenPort: number;
  targetHost: string;
  targetPort: number;
}

function parseArgs(argv: readonly string[]): BridgeArgs {
  let listenPort = 8787;
  let target = "127.0.0.1:7600";
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i]!;
    if (arg === "--listen") {
      listenPort = Number(argv[++i]);
    } else if (arg === "--target") {
      target = argv[++i] ?? "";
    } else {
      console.error(`unknown argument: ${arg}`);
      process.exit(2);
    }
  }
  const match = target.match(/^(.+):(\d+)$/);
  if (!match || !Number.isInteger(listenPort) || listenPort < 0) {
    console.error("usage: bridge --listen <port> --target <host>:<port>");
    process.exit(2);
  }
  return {
    listenPort,
    targetHost: match![1]!,
    targetPort: Number(match![2]!),
  };
}

function pipe(ws: WebSocket, args: BridgeArgs): void {
  const tcp = net.connect({ host: args.targetHost, port: args.targetPort });
  tcp.setNoDelay(true);
  tcp.on("data", (chunk: Buffer) => {
    if (ws.readyState === ws.OPEN) {
      ws.send(chunk.toString("utf8"));
    }
  });
  const shutdown = () => {
    tcp.destroy();
    ws.close();
  };
  tcp.on("close", shutdown);
  tcp.on("error", shutdown);
  ws.on("message", (data) => {
    const text = typeof data === "string" ? data : data.toString();
    tcp.write(text.endsWith("\n") ? text : text + "\n");
  });
  ws.on("close", shutdown);
  ws.on("error", shutdown);
}

export function startBridge(args: BridgeArgs): Promise<WebSocketServer> {
  return new Promise((resolve) => {
    const wss = new WebSocketServer({ port: args.listenPort });
    wss.on("connection", (ws) => pipe(ws, args));
    wss.on("listening", () => {
      const address = wss.address();
      const port = typeof address === "object" && address !== null ? address.port : args.listenPort;
      console.log(`BRIDGE;listen=${port};target=${args.targetHost}:${args.targetPort}`);
      resolve(wss);
    });
  });
}

const isMain =
  process.argv[1] !== undefined &&
  import.meta.url === pathToFileURL(process.argv[1]).href;

if (isMain) {
  startBridge(parseArgs(process.argv.slice(2))).then((wss) => {
    process.on("SIGINT", () => {
      wss.close();
      process.exit(0);
    });
  });
}
