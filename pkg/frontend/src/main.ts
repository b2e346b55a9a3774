// Page wiring: the 5 s (configurable) poll loop, the status card, sensor
// charts and the waypoint editor. Polls are coalesced (one in flight) and
// mission submission is one request at a time.

import { drawSeries } from "./charts.js";
import { StationClient } from "./client.js";
import { drawTrack } from "./map.js";
import { READING_KINDS } from "./types.js";
import { validateDraft } from "./validation.js";
import { ConsoleViewModel, pollOnce } from "./viewmodel.js";

const params = new URLSearchParams(window.location.search);
const baseUrl = params.get("station") ?? "http://127.0.0.1:8080";
const vehicleId = params.get("vehicle") ?? "usv-1";
const pollMs = Number(params.get("poll") ?? "5000");

const client = new StationClient(baseUrl);
const vm = new ConsoleViewModel(vehicleId);

const el = (id: string) => document.getElementById(id)!;

let pollInFlight = false;

async function poll(): Promise<void> {
  if (pollInFlight) return; // coalesce overlapping timers
  pollInFlight = true;
  try {
    vm.applyPoll(await pollOnce(client, vehicleId));
  } catch {
    vm.markOffline();
  } finally {
    pollInFlight = false;
    render();
  }
}

function renderStatus(): void {
  const card = el("status-card");
  if (!vm.latest) {
    card.innerHTML = "<em>no data</em>";
    return;
  }
  const s = vm.latest;
  // Values are printed exactly as the API reported them.
  card.innerHTML = `
    <table>
      <tr><td>position</td><td>${s.lat}, ${s.lon}</td></tr>
      <tr><td>heading</td><td>${s.heading_deg}°</td></tr>
      <tr><td>speed</td><td>${s.speed_m_s} m/s</td></tr>
      <tr><td>battery</td><td>${s.soc}</td></tr>
      <tr><td>flags</td><td>${Object.entries(s.flags)
        .filter(([, v]) => v)
        .map(([k]) => k)
        .join(", ") || "none"}</td></tr>
      <tr><td>frame t</td><td>${s.t} s (seq ${s.seq})</td></tr>
    </table>`;
}

function renderDraft(): void {
  const tbody = el("draft-rows");
  tbody.innerHTML = "";
  const check = validateDraft(vm.draft);
  vm.draft.forEach((row, i) => {
    const tr = document.createElement("tr");
    const error = check.rowErrors.get(i);
    tr.innerHTML = `
      <td><input data-i="${i}" data-k="hour" type="number" min="0" value="${row.hour ?? ""}"></td>
      <td><input data-i="${i}" data-k="lat" type="number" step="0.0001" value="${row.lat ?? ""}"></td>
      <td><input data-i="${i}" data-k="lon" type="number" step="0.0001" value="${row.lon ?? ""}"></td>
      <td><button data-remove="${i}">×</button></td>
      <td class="row-error">${error ?? ""}</td>`;
    tbody.appendChild(tr);
  });
  el("draft-form-error").textContent =
    check.formError ?? vm.submitError ?? "";
  (el("submit-mission") as HTMLButtonElement).disabled = !vm.canSubmit;
  el("posted-version").textContent =
    vm.lastPostedVersion === null ? "" : `version ${vm.lastPostedVersion}`;
}

function renderOutbox(): void {
  const tbody = el("outbox-rows");
  tbody.innerHTML = "";
  for (const entry of vm.outbox) {
    const tr = document.createElement("tr");
    tr.innerHTML = `
      <td>${entry.version}</td>
      <td class="status-${entry.status}">${entry.status}</td>
      <td>${entry.t_queued}</td>
      <td>${entry.t_sent ?? ""}</td>
      <td>${entry.t_acked ?? ""}</td>`;
    tbody.appendChild(tr);
  }
}

function render(): void {
  el("offline-banner").hidden = !vm.offline;
  el("capsize-alert").hidden = !vm.capsizeAlert;
  el("stale-note").textContent = vm.lastPollAt
    ? `data as of ${new Date(vm.lastPollAt).toLocaleTimeString()}${vm.offline ? " (stale)" : ""}`
    : "never polled";
  drawTrack(el("map") as HTMLCanvasElement, vm.track, vm.capsizeAlert);
  READING_KINDS.forEach((kind) => {
    drawSeries(
      el(`chart-${kind}`) as HTMLCanvasElement,
      vm.readings[kind] ?? [],
      kind,
    );
  });
  renderStatus();
  renderDraft();
  renderOutbox();
}

el("draft-rows").addEventListener("change", (ev) => {
  const input = ev.target as HTMLInputElement;
  const i = Number(input.dataset.i);
  const key = input.dataset.k as "hour" | "lat" | "lon";
  const value = input.value === "" ? null : Number(input.value);
  vm.updateDraftRow(i, { [key]: value });
  renderDraft();
});

el("draft-rows").addEventListener("click", (ev) => {
  const button = ev.target as HTMLElement;
  if (button.dataset.remove !== undefined) {
    vm.removeDraftRow(Number(button.dataset.remove));
    renderDraft();
  }
});

el("add-row").addEventListener("click", () => {
  vm.addDraftRow();
  renderDraft();
});

el("submit-mission").addEventListener("click", async () => {
  renderDraft();
  const posted = await vm.submitMission(client);
  renderDraft();
  if (posted) void poll();
});

void poll();
setInterval(() => void poll(), pollMs);
