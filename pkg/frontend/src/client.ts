// WebSocket wiring: joins a session, feeds server frames into the view
// model, and sends whatever frames the reducer or the user hands back.

import type { ClientFrame, ServerFrame } from "./protocol.js";
import { ViewModel } from "./viewmodel.js";

export interface Connection {
  vm: ViewModel;
  send(frame: ClientFrame): void;
  close(): void;
}

export function connect(
  url: string,
  session: string,
  name: string,
  onChange: (vm: ViewModel) => void,
  onClose: (reason: string) => void = () => {},
): Connection {
  const vm = new ViewModel();
  const ws = new WebSocket(url);

  const send = (frame: ClientFrame) => {
    if (ws.readyState === WebSocket.OPEN) {
      ws.send(JSON.stringify(frame));
    }
  };

  ws.addEventListener("open", () => {
    send({ t: "join", session, name });
  });
  ws.addEventListener("message", (event) => {
    const frame = JSON.parse(String(event.data)) as ServerFrame;
    for (const reply of vm.applyFrame(frame)) {
      send(reply);
    }
    onChange(vm);
  });
  ws.addEventListener("close", () => {
    vm.connection = "closed";
    onChange(vm);
    onClose("connection closed");
  });
  ws.addEventListener("error", () => {
    vm.connection = "closed";
    onChange(vm);
    onClose("connection failed");
  });

  return { vm, send, close: () => ws.close() };
}
