import init, { detect, mask, tokenize } from "./pkg/nightjar_wasm.js";

const $ = (id) => document.getElementById(id);

// Offsets are in Unicode scalar values, so slice an array of code points.
function highlight(text, detections) {
  const chars = Array.from(text);
  const out = document.createDocumentFragment();
  let pos = 0;
  for (const d of detections) {
    out.append(chars.slice(pos, d.span.start).join(""));
    const m = document.createElement("mark");
    m.title = `${d.label} (${d.source})`;
    m.textContent = chars.slice(d.span.start, d.span.end).join("");
    out.append(m);
    pos = d.span.end;
  }
  out.append(chars.slice(pos).join(""));
  $("highlight").replaceChildren(out);
}

function update() {
  const text = $("text").value;
  const verified = $("verified").checked;
  try {
    const detections = JSON.parse(detect(text, verified));
    highlight(text, detections);
    $("detections").textContent = detections
      .map((d) => `${d.span.start}-${d.span.end}  ${d.label.padEnd(10)} ${d.source.padEnd(8)} ${d.surface}`)
      .join("\n");
    const seed = BigInt($("seed").value || 0);
    const masked = JSON.parse(mask(text, verified, $("policy").value, seed));
    $("masked").textContent = masked.masked_text;
    $("tokens").textContent = JSON.parse(tokenize(text))
      .map((t) => `${t.text} [${t.kind}]`)
      .join("  ");
  } catch (e) {
    $("masked").textContent = String(e);
  }
}

await init();
for (const id of ["text", "verified", "policy", "seed"]) {
  $(id).addEventListener("input", update);
}
update();
