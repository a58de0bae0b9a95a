import init, { analyze, type_view, heatmap } from "./pkg/pdflow_web.js";

const $ = (id) => document.getElementById(id);
let view = "flows";

function el(tag, attrs = {}, ...children) {
  const node = document.createElement(tag);
  Object.assign(node, attrs);
  node.append(...children);
  return node;
}

function table(headers, rows) {
  return el("table", {},
    el("thead", {}, el("tr", {}, ...headers.map((h) => el("th", {}, h)))),
    el("tbody", {}, ...rows.map((r) => el("tr", {}, ...r.map((c) =>
      el("td", { className: typeof c === "number" ? "num" : "" }, String(c)))))));
}

function renderFlows(data) {
  const out = [];
  for (const group of data.table.groups) {
    if (data.table.group_by !== "none") out.push(el("h3", {}, `${group.key} (${group.rows.length})`));
    out.push(table(["Line", "Source", "Sink", "Sink type", "Pattern", "Flow"],
      group.rows.map((r) => [r.line, r.source, r.sink, r.sink_type, r.shape, r.flow_pattern_instance])));
  }
  if (!data.findings.length) out.push(el("p", {}, "No personal data flows found."));
  return out;
}

function renderTypes(data) {
  const list = el("ul");
  for (const c of data.tree.categories) {
    const stems = el("ul", {}, ...c.stems.map((s) =>
      el("li", {}, `${s.stem} (${s.count}): `, s.variants.map((v) => `${v.name} ×${v.count}`).join(", "))));
    list.append(el("li", {}, `${c.category} ${c.label} (${c.count})`, stems));
  }
  return [list, el("h3", {}, "Mermaid"), el("pre", {}, data.mermaid)];
}

function renderHeatmap(h) {
  const max = Math.max(1, ...h.counts.flat());
  const head = el("tr", {}, el("th"), ...h.sinks.map((s) => el("th", {}, s)), el("th", {}, "total"));
  const body = h.sources.map((src, i) => el("tr", {}, el("th", {}, src),
    ...h.counts[i].map((n) => el("td", {
      className: "num",
      style: `background: rgba(200, 40, 40, ${(n / max) * 0.8})`,
    }, n ? String(n) : "")),
    el("td", { className: "num" }, String(h.row_totals[i]))));
  const foot = el("tr", {}, el("th", {}, "total"),
    ...h.column_totals.map((n) => el("td", { className: "num" }, String(n))),
    el("td", { className: "num" }, String(h.total)));
  return [el("table", {}, el("thead", {}, head), el("tbody", {}, ...body, foot))];
}

function refresh() {
  const code = $("code").value, lang = $("lang").value, rules = $("rules").value;
  $("error").textContent = "";
  try {
    let nodes;
    if (view === "flows") {
      nodes = renderFlows(JSON.parse(analyze(code, lang, rules, $("group").value, $("propagation").checked)));
    } else if (view === "types") {
      nodes = renderTypes(JSON.parse(type_view(code, lang, rules)));
    } else {
      nodes = renderHeatmap(JSON.parse(heatmap(code, lang, rules)));
    }
    $("out").replaceChildren(...nodes);
  } catch (e) {
    $("error").textContent = e.message ?? String(e);
  }
}

await init();
for (const id of ["code", "rules"]) $(id).addEventListener("input", refresh);
for (const id of ["lang", "group", "propagation"]) $(id).addEventListener("change", refresh);
for (const b of document.querySelectorAll("nav button")) {
  b.addEventListener("click", () => {
    view = b.dataset.view;
    document.querySelectorAll("nav button").forEach((x) => x.setAttribute("aria-pressed", String(x === b)));
    refresh();
  });
}
refresh();
