#pragma once

// A small well-formedness check for the server's HTML: doctype, balanced
// non-void elements, quoted attributes, no stray '<'. Returns an empty string
// when the document passes, otherwise the first problem.

#include <algorithm>
#include <cctype>
#include <set>
#include <string>
#include <vector>

namespace testing {

inline std::string html_problem(const std::string& doc) {
  static const std::set<std::string> kVoid = {"meta", "link", "br", "hr", "img", "input"};
  if (!doc.starts_with("<!DOCTYPE html>")) return "missing doctype";
  std::vector<std::string> open;
  std::size_t i = std::string("<!DOCTYPE html>").size();
  while (i < doc.size()) {
    if (doc[i] == '>') return "stray '>' at " + std::to_string(i);
    if (doc[i] != '<') {
      ++i;
      continue;
    }
    const auto end = doc.find('>', i);
    if (end == std::string::npos) return "unterminated tag";
    std::string tag = doc.substr(i + 1, end - i - 1);
    if (tag.find('<') != std::string::npos) return "'<' inside tag at " + std::to_string(i);
    const bool closing = !tag.empty() && tag[0] == '/';
    if (closing) tag.erase(0, 1);
    std::size_t n = 0;
    while (n < tag.size() && (std::isalnum(static_cast<unsigned char>(tag[n])))) ++n;
    const std::string name = tag.substr(0, n);
    if (name.empty()) return "bad tag at " + std::to_string(i);
    if (std::any_of(name.begin(), name.end(), [](unsigned char c) { return std::isupper(c); }))
      return "uppercase tag " + name;
    // attributes: name="value" pairs only
    std::string attrs = tag.substr(n);
    std::size_t quotes = std::count(attrs.begin(), attrs.end(), '"');
    if (quotes % 2) return "unbalanced quotes in <" + name + ">";
    if (closing) {
      if (open.empty() || open.back() != name) {
        return "unexpected </" + name + ">" + (open.empty() ? "" : " inside <" + open.back() + ">");
      }
      open.pop_back();
    } else if (!kVoid.contains(name)) {
      open.push_back(name);
    }
    i = end + 1;
    if (!closing && (name == "script" || name == "style")) {
      const auto close = doc.find("</" + name + ">", i);
      if (close == std::string::npos) return "unclosed <" + name + ">";
      i = close;
    }
  }
  if (!open.empty()) return "unclosed <" + open.back() + ">";
  for (const char* required : {"<html lang=\"", "<meta charset=\"utf-8\">", "<title>", "<body>"}) {
    if (doc.find(required) == std::string::npos) return std::string("missing ") + required;
  }
  return {};
}

}  // namespace testing
