// DOM writers for the dashboard section. Everything goes through
// textContent; API data is never interpreted as markup.

import type { MissionInfo, PassList, TelemetrySnapshot } from "./api.js";
import { formatTimestamp } from "./format.js";
import { beaconRows, inEclipse, passRows } from "./viewmodel.js";

export function renderMission(doc: Document, info: MissionInfo): void {
  doc.title = info.name;
  setText(doc, "logo", info.logo_text);
  setText(doc, "mission-name", info.name);
  setText(doc, "ground-station", `Ground station: ${info.ground_station}`);
  setText(doc, "mission-desc", info.description);
  setText(doc, "notice", info.notice);
}

export function renderBeacon(doc: Document, snapshot: TelemetrySnapshot): void {
  const body = doc.getElementById("beacon-rows") as HTMLElement;
  body.replaceChildren();
  for (const row of beaconRows(snapshot)) {
    const tr = doc.createElement("tr");
    const name = doc.createElement("td");
    name.textContent = row.label;
    const value = doc.createElement("td");
    value.textContent = row.value;
    tr.append(name, value);
    body.appendChild(tr);
  }
  const eclipse = doc.getElementById("eclipse-tag") as HTMLElement;
  eclipse.hidden = inEclipse(snapshot) !== true;
  setText(doc, "as-of", `as of ${formatTimestamp(snapshot.timestamp)}`);
}

export function renderPasses(doc: Document, list: PassList): void {
  const state = doc.getElementById("pass-state") as HTMLElement;
  state.textContent = list.in_pass ? "PASS ONGOING" : "NO CONTACT";
  state.classList.toggle("active", list.in_pass);

  const body = doc.getElementById("pass-rows") as HTMLElement;
  body.replaceChildren();
  for (const row of passRows(list)) {
    const tr = doc.createElement("tr");
    if (row.ongoing) tr.classList.add("ongoing");
    for (const text of [row.aos, row.los, row.duration, row.maxElevation]) {
      const td = doc.createElement("td");
      td.textContent = text;
      tr.appendChild(td);
    }
    const tag = doc.createElement("td");
    if (row.ongoing) {
      const badge = doc.createElement("span");
      badge.className = "badge";
      badge.textContent = "ONGOING";
      tag.appendChild(badge);
    }
    tr.appendChild(tag);
    body.appendChild(tr);
  }
}

export function setLinkDown(doc: Document, down: boolean): void {
  (doc.getElementById("link-banner") as HTMLElement).hidden = !down;
}

function setText(doc: Document, id: string, text: string): void {
  const el = doc.getElementById(id);
  if (el) el.textContent = text;
}
