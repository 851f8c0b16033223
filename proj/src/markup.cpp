#include "tabsynth/markup.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>

#include "tabsynth/error.hpp"
#include "tabsynth/text.hpp"

namespace tabsynth::markup {
namespace {

constexpr std::array<std::string_view, 9> kVoidElements = {"br",  "img",   "hr",   "meta", "input",
                                                           "col", "link", "area", "wbr"};

bool is_void(std::string_view tag) {
  return std::find(kVoidElements.begin(), kVoidElements.end(), tag) != kVoidElements.end();
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Node run() {
    Node root;
    root.tag = "#root";
    std::vector<Node*> stack{&root};
    std::string pending;
    auto flush_text = [&] {
      if (!pending.empty()) {
        Node t;
        t.text = decode_entities(pending);
        stack.back()->children.push_back(std::move(t));
        pending.clear();
      }
    };

    while (pos_ < src_.size()) {
      const char c = src_[pos_];
      if (c != '<') {
        pending.push_back(c);
        ++pos_;
        continue;
      }
      if (starts_with("<!--")) {
        flush_text();
        const auto end = src_.find("-->", pos_ + 4);
        if (end == std::string_view::npos) fail("unterminated comment");
        pos_ = end + 3;
        continue;
      }
      if (starts_with("<!") || starts_with("<?")) {
        flush_text();
        const auto end = src_.find('>', pos_);
        if (end == std::string_view::npos) fail("unterminated declaration");
        pos_ = end + 1;
        continue;
      }
      if (pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        flush_text();
        pos_ += 2;
        const std::string name = lower(read_name());
        skip_space();
        if (pos_ >= src_.size() || src_[pos_] != '>') fail("malformed close tag </" + name);
        ++pos_;
        if (is_void(name)) continue;
        if (stack.size() < 2 || stack.back()->tag != name) {
          fail("unexpected </" + name + ">" +
               (stack.size() > 1 ? " while <" + stack.back()->tag + "> is open" : ""));
        }
        stack.pop_back();
        continue;
      }
      if (pos_ + 1 < src_.size() && std::isalpha(static_cast<unsigned char>(src_[pos_ + 1]))) {
        flush_text();
        ++pos_;
        Node el;
        el.tag = lower(read_name());
        bool self_closing = false;
        for (;;) {
          skip_space();
          if (pos_ >= src_.size()) fail("unterminated tag <" + el.tag);
          if (src_[pos_] == '>') {
            ++pos_;
            break;
          }
          if (starts_with("/>")) {
            pos_ += 2;
            self_closing = true;
            break;
          }
          std::string key = lower(read_name());
          if (key.empty()) fail("bad attribute in <" + el.tag + ">");
          skip_space();
          std::string value;
          if (pos_ < src_.size() && src_[pos_] == '=') {
            ++pos_;
            skip_space();
            value = decode_entities(read_value());
          }
          el.attrs.emplace_back(std::move(key), std::move(value));
        }
        const bool closes_now = self_closing || is_void(el.tag);
        stack.back()->children.push_back(std::move(el));
        if (!closes_now) stack.push_back(&stack.back()->children.back());
        continue;
      }
      pending.push_back(c);
      ++pos_;
    }
    flush_text();
    if (stack.size() != 1) fail("unclosed <" + stack.back()->tag + ">");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw Error(Errc::MalformedMarkup, why + " at offset " + std::to_string(pos_));
  }
  bool starts_with(std::string_view s) const { return src_.substr(pos_, s.size()) == s; }
  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  std::string_view read_name() {
    const auto begin = pos_;
    while (pos_ < src_.size() && is_name_char(src_[pos_])) ++pos_;
    return src_.substr(begin, pos_ - begin);
  }
  std::string_view read_value() {
    if (pos_ < src_.size() && (src_[pos_] == '"' || src_[pos_] == '\'')) {
      const char q = src_[pos_++];
      const auto end = src_.find(q, pos_);
      if (end == std::string_view::npos) fail("unterminated attribute value");
      const auto v = src_.substr(pos_, end - pos_);
      pos_ = end + 1;
      return v;
    }
    const auto begin = pos_;
    while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) &&
           src_[pos_] != '>' && !starts_with("/>")) {
      ++pos_;
    }
    return src_.substr(begin, pos_ - begin);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

void collect_lines(const Node& n, std::vector<std::string>& lines) {
  if (n.is_text()) {
    lines.back() += n.text;
    return;
  }
  if (n.tag == "br") {
    lines.emplace_back();
    return;
  }
  for (const auto& child : n.children) collect_lines(child, lines);
}

}  // namespace

const std::string* Node::attr(std::string_view name) const {
  for (const auto& [k, v] : attrs) {
    if (k == name) return &v;
  }
  return nullptr;
}

Node parse(std::string_view source) { return Parser(source).run(); }

std::string decode_entities(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] != '&') {
      out.push_back(s[i++]);
      continue;
    }
    const auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out.push_back(s[i++]);
      continue;
    }
    const auto name = s.substr(i + 1, semi - i - 1);
    char32_t cp = 0;
    if (name == "amp") cp = U'&';
    else if (name == "lt") cp = U'<';
    else if (name == "gt") cp = U'>';
    else if (name == "quot") cp = U'"';
    else if (name == "apos") cp = U'\'';
    else if (name == "nbsp") cp = 0xA0;
    else if (name.size() > 1 && name[0] == '#') {
      const bool hex = name[1] == 'x' || name[1] == 'X';
      const auto digits = name.substr(hex ? 2 : 1);
      std::uint32_t v = 0;
      const auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v, hex ? 16 : 10);
      if (ec == std::errc{} && p == digits.data() + digits.size() && v > 0 && v <= 0x10FFFF) cp = v;
    }
    if (cp == 0) {
      out.push_back(s[i++]);
      continue;
    }
    text::append_utf8(out, cp);
    i = semi + 1;
  }
  return out;
}

std::string escape_text(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::vector<std::string> cell_lines(const Node& cell) {
  std::vector<std::string> lines(1);
  for (const auto& child : cell.children) collect_lines(child, lines);
  for (auto& line : lines) line = text::collapse_whitespace(line);
  if (lines.size() == 1 && lines.front().empty()) lines.clear();
  return lines;
}

int span_attr(const Node& cell, std::string_view name) {
  const std::string* v = cell.attr(name);
  if (!v) return 1;
  int n = 0;
  const auto* b = v->data();
  const auto* e = v->data() + v->size();
  while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  std::from_chars(b, e, n);
  return n < 1 ? 1 : n;
}

}  // namespace tabsynth::markup
