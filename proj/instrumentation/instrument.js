// Page-side half of the renderer. Evaluated once per page after load; the
// host then calls, in order:
//   __vicorpus.prepare()        wrap text, prune unusable elements, list paragraphs
//   __vicorpus.finish(opts)     register fonts, apply the paragraph assignment (async)
//   __vicorpus.collect(opts)    measure everything, return the report as a JSON string
(function () {
  'use strict';

  const VERSION = '1.0.0';
  const MARK = 'data-vc';
  const LATEX_CLASS = 'mwe-math-fallback-image-inline';
  const REGION_TAGS = new Set(['img', 'canvas', 'svg', 'video']);
  // Text below these is never wrapped.
  const NO_WRAP = new Set(['script', 'style', 'noscript', 'template', 'textarea', 'title', 'option', 'select',
    'datalist', 'svg', 'math', 'video', 'canvas', 'iframe', 'object']);
  // Never pruned: removing them changes styling, not content.
  const KEEP = new Set(['style', 'link', 'meta', 'script', 'template', 'noscript', 'head', 'title', 'base']);
  const MAX_REPORT_BYTES = 50 * 1024 * 1024;

  // splitmix64, bit-identical to the host's SplitMix64.
  const M64 = (1n << 64n) - 1n;
  function mix(z) {
    z = ((z ^ (z >> 30n)) * 0xBF58476D1CE4E5B9n) & M64;
    z = ((z ^ (z >> 27n)) * 0x94D049BB133111EBn) & M64;
    return z ^ (z >> 31n);
  }
  class SplitMix64 {
    constructor(seed) { this.s = BigInt.asUintN(64, BigInt(seed)); }
    next() { this.s = (this.s + 0x9E3779B97F4A7C15n) & M64; return mix(this.s); }
    below(n) { return n === 0 ? 0 : Number(this.next() % BigInt(n)); }
  }

  const state = {
    prepared: false,
    removed: { pseudo: 0, oversize: 0, invisible: 0, offscreen: 0, placeholder: 0 },
    assignment: {},
    warnings: [],
  };

  function tag(el) { return el.localName; }

  function isMarked(el) { return el.nodeType === 1 && tag(el) === 'span' && el.hasAttribute(MARK); }

  function regionKind(el) {
    if (el.classList && el.classList.contains(LATEX_CLASS)) return 'latex';
    if (REGION_TAGS.has(tag(el))) return 'image';
    return null;
  }

  function insideNoWrap(node) {
    for (let el = node.parentElement; el; el = el.parentElement) {
      if (NO_WRAP.has(tag(el)) || isMarked(el)) return true;
    }
    return false;
  }

  // Child-element indices from the document: <html> is [0], <body> usually [0, 1].
  // Marker spans are skipped when indexing other elements, so wrapping text
  // does not renumber the page's own elements.
  function childIndex(el) {
    let i = 0;
    const own = !isMarked(el);
    for (let s = el.previousElementSibling; s; s = s.previousElementSibling) {
      if (!own || !isMarked(s)) ++i;
    }
    return i;
  }

  function nodePath(el) {
    const out = [];
    for (; el && el.nodeType === 1; el = el.parentElement) out.push(el.parentElement ? childIndex(el) : 0);
    return out.reverse();
  }

  function isBlockish(el) {
    const d = getComputedStyle(el).display;
    return !(d === 'inline' || d === 'contents' || d === 'none' || d.startsWith('ruby'));
  }

  function paragraphOf(el) {
    for (let p = el.parentElement; p; p = p.parentElement) {
      if (isBlockish(p)) return p;
    }
    return document.documentElement;
  }

  function addSpans(root) {
    const walker = document.createTreeWalker(root || document.body, NodeFilter.SHOW_TEXT);
    const nodes = [];
    for (let n = walker.nextNode(); n; n = walker.nextNode()) {
      if (n.data.length > 0 && !insideNoWrap(n)) nodes.push(n);
    }
    for (const n of nodes) {
      const frag = document.createDocumentFragment();
      for (const ch of n.data) {
        const span = document.createElement('span');
        span.setAttribute(MARK, /^\s$/u.test(ch) ? 'w' : 'c');
        span.textContent = ch;
        frag.appendChild(span);
      }
      n.parentNode.replaceChild(frag, n);
    }
    return nodes.length;
  }

  function rectOf(el) {
    const r = el.getBoundingClientRect();
    return { x: r.left + window.scrollX, y: r.top + window.scrollY, w: r.width, h: r.height };
  }

  function area(r) { return r.w * r.h; }

  function injectStyle(id, css) {
    let s = document.getElementById(id);
    if (!s) {
      s = document.createElement('style');
      s.id = id;
      (document.head || document.documentElement).appendChild(s);
    }
    s.textContent = css;
  }

  function elementsIn(root) {
    return Array.from(root.querySelectorAll('*')).filter((el) => !KEEP.has(tag(el)));
  }

  function removeAll(list) {
    let n = 0;
    for (const el of list) {
      if (el.isConnected) { el.remove(); ++n; }
    }
    return n;
  }

  function removePseudo() {
    let n = 0;
    for (const el of elementsIn(document.body)) {
      for (const which of ['::before', '::after']) {
        const c = getComputedStyle(el, which).content;
        if (c && c !== 'none' && c !== 'normal') ++n;
      }
    }
    injectStyle('__vc_pseudo', '*::before,*::after{content:none!important}');
    return n;
  }

  function removePlaceholder() {
    return removeAll(Array.from(document.body.querySelectorAll('[placeholder]')));
  }

  function removeInvisible() {
    const doomed = [];
    for (const el of elementsIn(document.body)) {
      const cs = getComputedStyle(el);
      if (cs.display === 'none' || parseFloat(cs.opacity) === 0) { doomed.push(el); continue; }
      if (cs.visibility !== 'visible') {
        // A hidden element may still show descendants that opt back in.
        const shown = Array.from(el.querySelectorAll('*')).some((d) => getComputedStyle(d).visibility === 'visible');
        if (!shown) doomed.push(el);
      }
    }
    // Only the outermost doomed element of each subtree counts.
    const set = new Set(doomed);
    const top = doomed.filter((el) => {
      for (let p = el.parentElement; p; p = p.parentElement) if (set.has(p)) return false;
      return true;
    });
    return removeAll(top);
  }

  function removeOversize() {
    let n = 0;
    for (const el of elementsIn(document.body)) {
      if (!el.isConnected) continue;
      const parent = el.parentElement;
      if (!parent || parent === document.documentElement || !isBlockish(parent)) continue;
      const pr = parent.getBoundingClientRect();
      if (pr.width <= 0 || pr.height <= 0) continue;
      const r = el.getBoundingClientRect();
      if (r.width > pr.width && r.height > pr.height) { el.remove(); ++n; }
    }
    return n;
  }

  function removeOffscreen() {
    const W = document.documentElement.scrollWidth;
    const H = document.documentElement.scrollHeight;
    const outside = (r) => r.x + r.w <= 0 || r.y + r.h <= 0 || r.x >= W || r.y >= H;
    const content = (el) => isMarked(el) || regionKind(el) !== null;
    let n = 0;
    for (const el of elementsIn(document.body)) {
      if (!el.isConnected) continue;
      const r = rectOf(el);
      if (area(r) <= 0 || !outside(r)) continue;
      // Keep containers that still hold visible content placed back on the page.
      const kept = Array.from(el.querySelectorAll('*')).some((d) => {
        if (!content(d)) return false;
        const dr = rectOf(d);
        return area(dr) > 0 && !outside(dr);
      });
      if (!kept) { el.remove(); ++n; }
    }
    return n;
  }

  function removeUnusableElements() {
    const r = state.removed;
    const before = r.pseudo + r.oversize + r.invisible + r.offscreen + r.placeholder;
    r.pseudo += removePseudo();
    r.placeholder += removePlaceholder();
    r.invisible += removeInvisible();
    r.oversize += removeOversize();
    r.offscreen += removeOffscreen();
    return r.pseudo + r.oversize + r.invisible + r.offscreen + r.placeholder - before;
  }

  // Spans never take page styling that would move or resize them, and their
  // box follows the font metrics.
  const SPAN_CSS = `span[${MARK}]{all:unset!important;line-height:normal!important;` +
    'font-kerning:none!important;font-variant-ligatures:none!important;font-feature-settings:normal!important;' +
    'letter-spacing:normal!important;word-spacing:normal!important;text-transform:none!important;' +
    'font-synthesis:none!important;font-size-adjust:none!important;font-stretch:normal!important}';

  function paragraphs() {
    const byKey = new Map();
    for (const span of document.querySelectorAll(`span[${MARK}]`)) {
      const para = paragraphOf(span);
      const key = nodePath(para).join('/');
      let p = byKey.get(key);
      if (!p) { p = { key, text: '', el: para }; byKey.set(key, p); }
      p.text += span.textContent;
    }
    return Array.from(byKey.values()).filter((p) => /\S/u.test(p.text));
  }

  function changeParagraphFonts(families, seed) {
    const out = {};
    if (!families || families.length === 0) {
      state.warnings.push('no_font_families');
      return out;
    }
    const rng = new SplitMix64(seed);
    for (const p of paragraphs()) out[p.key] = families[rng.below(families.length)];
    return out;
  }

  function cssString(s) { return '"' + String(s).replace(/["\\]/g, '\\$&').replace(/\n/g, '\\a ') + '"'; }

  function prepare() {
    if (!state.prepared) {
      addSpans(document.body);
      injectStyle('__vc_spans', SPAN_CSS);
      removeUnusableElements();
      state.prepared = true;
    }
    return JSON.stringify({ paragraphs: paragraphs().map((p) => ({ key: p.key, text: p.text })) });
  }

  // opts: {faces: [{family, url}], assignment: {key: family}} or {families, seed}.
  // Faces alias catalog families so local system fonts never shadow them.
  async function finish(opts) {
    opts = opts || {};
    const aliases = {};
    const faces = opts.faces || [];
    let css = '';
    faces.forEach((f, i) => {
      const alias = `vc-face-${i}`;
      aliases[f.family] = alias;
      css += `@font-face{font-family:${cssString(alias)};src:url(${cssString(f.url)});` +
        'font-weight:100 900;font-style:normal;font-display:block}';
    });
    injectStyle('__vc_faces', css);
    state.assignment = opts.assignment || changeParagraphFonts(opts.families, opts.seed || 0);
    for (const p of paragraphs()) {
      const family = state.assignment[p.key];
      if (!family) continue;
      const value = cssString(aliases[family] || family);
      for (const span of p.el.querySelectorAll(`span[${MARK}]`)) {
        if (paragraphOf(span) === p.el) span.style.setProperty('font-family', value, 'important');
      }
    }
    await Promise.all(Object.values(aliases).map((a) => document.fonts.load(`16px ${cssString(a)}`).catch(() => {
      state.warnings.push(`font_load_failed:${a}`);
    })));
    await document.fonts.ready;
    return JSON.stringify({
      width: document.documentElement.scrollWidth,
      height: Math.ceil(Math.max(document.documentElement.scrollHeight, document.body ? document.body.scrollHeight : 0)),
    });
  }

  function firstFamily(cs) {
    const f = cs.fontFamily.split(',')[0] || '';
    return f.trim().replace(/^["']|["']$/g, '');
  }

  // opts: {pageWidth, pageHeight, truncated}
  function collect(opts) {
    opts = opts || {};
    const chars = [];
    const regions = [];
    const paraCache = new Map();
    const paraPath = (el) => {
      const p = paragraphOf(el);
      let path = paraCache.get(p);
      if (!path) { path = nodePath(p); paraCache.set(p, path); }
      return path;
    };
    let seq = 0;
    const walker = document.createTreeWalker(document.body, NodeFilter.SHOW_ELEMENT);
    let regionDepth = 0;
    const regionStack = [];
    for (let el = walker.nextNode(); el; el = walker.nextNode()) {
      while (regionStack.length && !regionStack[regionStack.length - 1].contains(el)) { regionStack.pop(); --regionDepth; }
      if (isMarked(el)) {
        const r = rectOf(el);
        const s = seq++;
        if (area(r) <= 0) continue;
        const cs = getComputedStyle(el);
        const pp = paraPath(el);
        const path = nodePath(el);
        chars.push({
          text: el.textContent,
          rect: r,
          node_path: path,
          para_path: pp,
          dom_depth: path.length - 1,
          seq: s,
          font_family: state.assignment[pp.join('/')] || firstFamily(cs),
          font_size_px: parseFloat(cs.fontSize),
          is_whitespace: el.getAttribute(MARK) === 'w',
        });
        continue;
      }
      const kind = regionKind(el);
      if (kind && regionDepth === 0) {
        const r = rectOf(el);
        const s = seq++;
        regionStack.push(el);
        ++regionDepth;
        if (area(r) <= 0) continue;
        const rec = { rect: r, kind, node_path: nodePath(el), para_path: paraPath(el), seq: s };
        const alt = el.getAttribute('alt');
        if (alt !== null) rec.alt = alt;
        regions.push(rec);
      }
    }
    const report = {
      script_version: VERSION,
      page_width: Math.max(1, Math.round(opts.pageWidth || window.innerWidth)),
      page_height: Math.max(1, Math.round(opts.pageHeight || window.innerHeight)),
      truncated: !!opts.truncated,
      chars,
      regions,
      font_assignment: state.assignment,
      removed: state.removed,
      warnings: state.warnings,
    };
    const text = JSON.stringify(report);
    if (text.length > MAX_REPORT_BYTES) {
      return JSON.stringify({ error: 'report_too_large', bytes: text.length });
    }
    return text;
  }

  window.__vicorpus = {
    version: VERSION,
    SplitMix64,
    addSpans,
    removeUnusableElements,
    changeParagraphFonts,
    prepare,
    finish,
    collect,
  };
})();
