import init, { linearize, corrupt, smatch, randomGraph } from "./pkg/amrforge_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function show(id, fn) {
  const out = $(id);
  out.classList.remove("error");
  try {
    fn(out);
  } catch (e) {
    out.classList.add("error");
    out.textContent = String(e);
  }
}

function highlight(tokens) {
  const frag = document.createDocumentFragment();
  tokens.split(" ").forEach((t, i) => {
    if (i > 0) frag.append(" ");
    if (t === "[mask]") {
      const s = document.createElement("span");
      s.className = "mask";
      s.textContent = t;
      frag.append(s);
    } else {
      frag.append(t);
    }
  });
  return frag;
}

await init();

$("random").onclick = () => {
  $("graph").value = randomGraph(Math.floor(Math.random() * 2 ** 32), num("max-nodes"));
  $("do-linearize").click();
};

$("do-linearize").onclick = () => show("linearize-out", (out) => {
  const r = JSON.parse(linearize($("graph").value));
  const s = r.stats;
  out.textContent = `${r.tokens}\n\nsize ${s.size} (${s.size_bucket}), depth ${s.depth} (${s.depth_bucket}), ` +
    `reentrancies ${s.reentrancies} (${s.reent_bucket})`;
});

$("do-corrupt").onclick = () => show("corrupt-out", (out) => {
  const r = JSON.parse(corrupt($("graph").value, num("seed"), num("node-rate"), num("edge-rate"), num("subgraph-rate")));
  out.replaceChildren(highlight(r.corrupted));
  out.append(`\n\nmasked nodes: ${r.masked_nodes.join(", ") || "none"}`);
  out.append(`\nmasked edges: ${r.masked_edges.join(", ") || "none"}`);
  out.append(`\nsub-graph masked: ${r.subgraph_masked}`);
});

$("do-smatch").onclick = () => show("smatch-out", (out) => {
  const r = JSON.parse(smatch($("graph").value, $("gold").value, num("restarts")));
  const lines = [`P ${r.precision.toFixed(4)}  R ${r.recall.toFixed(4)}  F1 ${r.f1.toFixed(4)}  (${r.matched} triples)`];
  lines.push("mapping: " + r.mapping.map(([a, b]) => `${a}->${b}`).join(" "));
  for (const [name, v] of Object.entries(r.breakdown)) {
    lines.push(`${name.padEnd(13)} ${v ? v.f1.toFixed(4) : "-"}`);
  }
  out.textContent = lines.join("\n");
});

$("do-linearize").click();
