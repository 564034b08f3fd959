/**
 * Demo app shell: a 5-item focus ring steered by attention, an article view
 * reporting scroll telemetry, a live attention meter, a per-section heatmap
 * overlay, and a simulated-headset fallback (slider + blink button).
 */

import { EEGClient, GatewayConnection, SimulatedHeadset } from "./client.js";
import { DEFAULT_ENGINE_CONFIG } from "./engine.js";
import { initialFocus, reduceFocus, type FocusState } from "./focus.js";
import { darkestBand, heatmapBands, type SectionProfile } from "./heatmap.js";
import { ScrollReporter } from "./scroll.js";

const ARTICLES = [
  { id: "news", title: "News", body: paragraphs("world news", 14) },
  { id: "weather", title: "Weather", body: paragraphs("weather outlook", 12) },
  { id: "sports", title: "Sports", body: paragraphs("match reports", 16) },
  { id: "science", title: "Science", body: paragraphs("research notes", 18) },
  { id: "music", title: "Music", body: paragraphs("album reviews", 12) },
];

// canned profile for the offline heatmap demo (mid-page attention peak)
const SAMPLE_PROFILE: SectionProfile = {
  page_id: "sample",
  bucket_count: 20,
  buckets: Array.from({ length: 20 }, (_, i) => {
    const mean = 25 + 55 * Math.exp(-((i - 10) ** 2) / 18);
    return i < 4 ? { mean: null, count: 0, max: null } : { mean, count: 3, max: Math.round(mean + 8) };
  }),
};

function paragraphs(topic: string, n: number): string[] {
  return Array.from(
    { length: n },
    (_, i) =>
      `Section ${i + 1} of the ${topic}. Keep reading at your own pace; the ` +
      `gateway maps your attention to this part of the page as you scroll.`,
  );
}

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

const client = new EEGClient();
let focus: FocusState = initialFocus(ARTICLES.length);
let connection: GatewayConnection | null = null;
let simulator: SimulatedHeadset | null = null;
let reporter: ScrollReporter | null = null;

function applyEvent(eventKind: string): void {
  renderFocus();
  flashEvent(eventKind);
}

client.onEvent("*", (event) => {
  const before = focus;
  focus = reduceFocus(focus, event);
  if (focus !== before || event.event !== "focusAdvance") applyEvent(event.event);
  if (before.view !== focus.view) renderView();
});

client.onData("attention", (_t, value) => {
  const meter = el<HTMLDivElement>("meter-fill");
  meter.style.width = `${value}%`;
  meter.classList.toggle("high", value >= DEFAULT_ENGINE_CONFIG.attentionThreshold);
  el<HTMLSpanElement>("meter-value").textContent = String(value);
});

client.onStatus((status, detail) => {
  const banner = el<HTMLDivElement>("status-banner");
  banner.dataset.status = status;
  el<HTMLSpanElement>("status-text").textContent =
    status === "simulated" ? "simulated headset" : detail ? `${status} — ${detail}` : status;
  el<HTMLButtonElement>("retry-btn").hidden = status !== "disconnected";
  el<HTMLDivElement>("sim-controls").hidden = status !== "simulated";
});

function startGatewayMode(): void {
  simulator?.stop();
  simulator = null;
  const url = `ws://${location.host}/eeg`;
  connection = new GatewayConnection(client, url, {
    tracks: ["attention", "blink"],
    events: true,
  });
  connection.connect();
}

function startSimulatedMode(): void {
  connection?.close();
  connection = null;
  client.attachScrollTransport(null);
  simulator = new SimulatedHeadset(client);
  simulator.setAttention(Number(el<HTMLInputElement>("slider").value));
  simulator.start();
}

function renderFocus(): void {
  document.querySelectorAll<HTMLLIElement>("#menu li").forEach((item, i) => {
    item.classList.toggle("focused", i === focus.index && focus.view === "home");
  });
}

function renderView(): void {
  const detail = focus.view === "detail" && focus.openedIndex !== null;
  el<HTMLDivElement>("home-view").hidden = detail;
  el<HTMLDivElement>("detail-view").hidden = !detail;
  if (detail) openArticle(focus.openedIndex as number);
}

function flashEvent(kind: string): void {
  const log = el<HTMLDivElement>("event-log");
  log.textContent = kind;
  log.classList.remove("flash");
  void log.offsetWidth; // restart the animation
  log.classList.add("flash");
}

function openArticle(index: number): void {
  const article = ARTICLES[index]!;
  el<HTMLHeadingElement>("article-title").textContent = article.title;
  const body = el<HTMLDivElement>("article-body");
  body.innerHTML = "";
  for (const text of article.body) {
    const p = document.createElement("p");
    p.textContent = text;
    body.append(p);
  }
  el<HTMLDivElement>("heatmap-overlay").innerHTML = "";
  const pane = el<HTMLDivElement>("article-pane");
  pane.scrollTop = 0;
  reporter = new ScrollReporter((payload) => client.scroll(payload));
  reportScroll(article.id);
}

function reportScroll(pageId: string): void {
  const pane = el<HTMLDivElement>("article-pane");
  reporter?.report({
    pageId,
    scrollOffsetPx: Math.round(pane.scrollTop),
    viewportHPx: pane.clientHeight,
    contentHPx: pane.scrollHeight,
  });
}

async function showHeatmap(): Promise<void> {
  if (focus.openedIndex === null) return;
  const article = ARTICLES[focus.openedIndex]!;
  let profile = SAMPLE_PROFILE;
  let label = "sample profile (offline)";
  try {
    const resp = await fetch(`/api/profile?page_id=${encodeURIComponent(article.id)}&buckets=20`);
    if (resp.ok) {
      const body = (await resp.json()) as { profiles: { pageId: string; bucketCount: number; buckets: SectionProfile["buckets"] }[] };
      const live = body.profiles[0];
      if (live) {
        profile = { page_id: live.pageId, bucket_count: live.bucketCount, buckets: live.buckets };
        label = `live profile for ${live.pageId}`;
      } else {
        label = "no joined samples yet; showing sample profile";
      }
    }
  } catch {
    // offline: keep the sample profile
  }
  const overlay = el<HTMLDivElement>("heatmap-overlay");
  overlay.innerHTML = "";
  // bands cover the whole content height so each aligns with its section
  overlay.style.height = `${el<HTMLDivElement>("article-pane").scrollHeight}px`;
  const bands = heatmapBands(profile);
  for (const band of bands) {
    const div = document.createElement("div");
    div.className = "band";
    div.style.background = band.color;
    div.title = band.mean === null ? "no samples" : `mean attention ${band.mean.toFixed(1)}`;
    overlay.append(div);
  }
  const peak = darkestBand(bands);
  el<HTMLSpanElement>("heatmap-label").textContent =
    peak === null ? `${label}; empty` : `${label}; peak section ${peak + 1}/${bands.length}`;
}

function wireUi(): void {
  const menu = el<HTMLUListElement>("menu");
  for (const article of ARTICLES) {
    const li = document.createElement("li");
    li.textContent = article.title;
    menu.append(li);
  }

  el<HTMLSelectElement>("mode-select").addEventListener("change", (ev) => {
    const mode = (ev.target as HTMLSelectElement).value;
    if (mode === "simulated") startSimulatedMode();
    else startGatewayMode();
  });
  el<HTMLButtonElement>("retry-btn").addEventListener("click", () => connection?.retry());
  el<HTMLInputElement>("slider").addEventListener("input", (ev) => {
    simulator?.setAttention(Number((ev.target as HTMLInputElement).value));
  });
  el<HTMLButtonElement>("blink-btn").addEventListener("click", () => simulator?.blink());
  el<HTMLButtonElement>("heatmap-btn").addEventListener("click", () => void showHeatmap());
  el<HTMLButtonElement>("back-btn").addEventListener("click", () => {
    focus = { ...focus, view: "home", openedIndex: null };
    renderView();
    renderFocus();
  });

  const pane = el<HTMLDivElement>("article-pane");
  pane.addEventListener("scroll", () => {
    if (focus.openedIndex !== null) reportScroll(ARTICLES[focus.openedIndex]!.id);
  });
  setInterval(() => reporter?.tick(), 100);

  renderFocus();
  renderView();
  startSimulatedMode(); // hardware-free by default; switch to gateway in the menu
}

window.addEventListener("load", wireUi);
