#include "buildmgr/assets.hpp"

namespace buildmgr {

std::string_view builtin_stylesheet() {
  return R"css(:root {
  color-scheme: light dark;
  --fg: #1d1f21;
  --bg: #fdfdfd;
  --muted: #6a6f75;
  --line: #d5d8dc;
  --accent: #0b5cad;
}
@media (prefers-color-scheme: dark) {
  :root { --fg: #e4e6e8; --bg: #16181a; --muted: #9aa0a6; --line: #34383c; --accent: #6cb0f5; }
}
html { font-family: system-ui, sans-serif; line-height: 1.45; color: var(--fg); background: var(--bg); }
body { max-width: 72rem; margin: 0 auto; padding: 0 1rem 2rem; }
header nav { padding: 0.75rem 0; border-bottom: 1px solid var(--line); }
a { color: var(--accent); }
a:focus, button:focus { outline: 2px solid var(--accent); outline-offset: 2px; }
h1 { font-size: 1.5rem; }
h2 { font-size: 1.2rem; margin-top: 1.5rem; }
table { border-collapse: collapse; width: 100%; }
th, td { text-align: left; padding: 0.3rem 0.6rem; border-bottom: 1px solid var(--line); vertical-align: top; }
th { font-weight: 600; }
time { font-variant-numeric: tabular-nums; }
pre { overflow-x: auto; padding: 0.75rem; border: 1px solid var(--line); font-size: 0.85rem; white-space: pre-wrap; }
button { font: inherit; padding: 0.35rem 0.9rem; border: 1px solid var(--accent); background: transparent; color: var(--accent); cursor: pointer; }
iframe { display: block; width: 100%; border: 0; }
)css";
}

std::string_view builtin_client_script() {
  return R"js((function () {
  "use strict";
  var config = { pollIntervalMs: 3000, targetFrame: "content" };
  var frame = document.getElementById(config.targetFrame);
  if (!frame) return;
  var lastTag = null;
  var submitting = false;
  var inFlight = false;

  function resize() {
    try {
      var doc = frame.contentDocument;
      if (!doc || !doc.documentElement) return;
      frame.style.height = "0px";
      frame.style.height = doc.documentElement.scrollHeight + "px";
    } catch (e) {
      // cross-origin content: leave the frame alone
    }
  }

  function currentUrl() {
    try {
      return frame.contentWindow.location.href;
    } catch (e) {
      return frame.src;
    }
  }

  function poll() {
    if (submitting || inFlight) return;
    inFlight = true;
    var req = new XMLHttpRequest();
    req.open("HEAD", currentUrl());
    req.onload = function () {
      inFlight = false;
      var tag = req.getResponseHeader("ETag");
      if (req.status !== 200 || !tag) return;
      if (lastTag !== null && tag !== lastTag) {
        lastTag = tag;
        frame.contentWindow.location.reload();
        return;
      }
      lastTag = tag;
    };
    req.onerror = function () { inFlight = false; };
    req.send();
  }

  frame.addEventListener("load", function () {
    submitting = false;
    lastTag = null;
    resize();
    try {
      var doc = frame.contentDocument;
      doc.addEventListener("submit", function () { submitting = true; });
      new MutationObserver(resize).observe(doc.documentElement, { childList: true, subtree: true });
    } catch (e) {}
    poll();
  });
  window.addEventListener("resize", resize);
  setInterval(poll, Math.max(500, config.pollIntervalMs));
})();
)js";
}

}  // namespace buildmgr
