import { EditorSession, emptyScenario } from "../src/editor.js";
import type { Vec2 } from "../src/types.js";

export function drag(session: EditorSession, from: Vec2, to: Vec2) {
  session.beginStroke(from);
  session.updateStroke(to);
  return session.endStroke(to);
}

/**
 * Two rooms side by side with a connecting door, an exit on the east
 * wall, a safe area beyond it, and a few occupants. Built entirely
 * through editor gestures, the way a user would; the jittered inputs
 * exercise the live snapping.
 */
export function buildTwoRooms(): EditorSession {
  const s = new EditorSession(emptyScenario("two-rooms", "editor round trip"));
  s.setTool({ kind: "wall" });
  drag(s, [0, 0], [12.04, 0]);
  drag(s, [11.96, 0.02], [12, 6.01]);
  drag(s, [12.01, 5.98], [0.03, 6]);
  drag(s, [0, 6.02], [-0.02, 0]);
  drag(s, [6.02, 0.01], [5.98, 6.03]); // divider between the rooms

  s.setTool({ kind: "door" });
  if (!s.placeDoor([6.1, 3.0]).ok) throw new Error("divider door missed");
  if (!s.placeDoor([11.9, 2.5]).ok) throw new Error("east door missed");
  if (!s.toggleExitAt([12.0, 2.5])) throw new Error("exit toggle missed");

  s.setTool({ kind: "object", object: "desk" });
  s.click([3.1, 2.2]);
  s.setTool({ kind: "object", object: "plant" });
  s.click([9.4, 4.6]);

  s.setTool({ kind: "safe_area" });
  drag(s, [12.5, 1.0], [14.5, 4.0]);

  s.setTool({ kind: "pedestrian", type: "adult" });
  s.click([2.6, 4.1]);
  s.click([8.2, 1.4]);
  s.click([4.4, 1.9]);

  s.setTool({ kind: "fire" });
  s.click([1.6, 1.1]);
  return s;
}
