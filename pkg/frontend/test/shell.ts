// Load the real static shell into happy-dom so tests exercise the same
// element ids the browser gets. vitest runs with cwd at the package root.
import { readFileSync } from "node:fs";
import { join } from "node:path";

export function loadShell(): void {
  const html = readFileSync(join(process.cwd(), "public", "index.html"), "utf-8");
  const start = html.indexOf("<body>") + "<body>".length;
  const end = html.indexOf("</body>");
  // Drop the module script: tests import the sources directly, and
  // happy-dom would try to fetch it over the network.
  const body = html.slice(start, end).replace(/<script[\s\S]*?<\/script>/g, "");
  document.body.innerHTML = body;
}
