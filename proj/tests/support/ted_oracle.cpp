#include "ted_oracle.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <vector>

#include "tabsynth/text.hpp"

namespace tabsynth::testing {

namespace {

struct Flat {
  std::vector<const TableTree*> node;
  std::vector<int> last;  // preorder index of the last descendant
};

int flatten(const TableTree& t, Flat& f) {
  const int i = static_cast<int>(f.node.size());
  f.node.push_back(&t);
  f.last.push_back(i);
  int end = i;
  for (const auto& c : t.children) end = flatten(c, f);
  f.last[i] = end;
  return end;
}

bool ancestor(const Flat& f, int a, int d) { return a < d && d <= f.last[a]; }

double levenshtein_ratio(const std::string& x, const std::string& y) {
  const std::u32string a = text::decode_utf8(x), b = text::decode_utf8(y);
  if (a.empty() && b.empty()) return 0.0;
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1] ? 1 : 0)});
    }
  }
  return static_cast<double>(d[a.size()][b.size()]) / static_cast<double>(std::max(a.size(), b.size()));
}

double relabel(const TableTree& x, const TableTree& y, bool content) {
  if (x.tag != y.tag || x.row_span != y.row_span || x.col_span != y.col_span) return 1.0;
  if (content && x.is_cell()) return levenshtein_ratio(x.text, y.text);
  return 0.0;
}

struct Search {
  const Flat& a;
  const Flat& b;
  bool content;
  std::vector<std::pair<int, int>> pairs;
  double best = std::numeric_limits<double>::infinity();

  void run(int i, int min_j, double cost) {
    const int na = static_cast<int>(a.node.size()), nb = static_cast<int>(b.node.size());
    if (i == na) {
      const double total = cost + static_cast<double>(nb - static_cast<int>(pairs.size()));
      best = std::min(best, total);
      return;
    }
    run(i + 1, min_j, cost + 1.0);  // delete a[i]
    for (int j = min_j; j < nb; ++j) {
      bool ok = true;
      for (const auto& [pi, pj] : pairs) {
        if (ancestor(a, pi, i) != ancestor(b, pj, j)) {
          ok = false;
          break;
        }
      }
      if (!ok) continue;
      pairs.emplace_back(i, j);
      run(i + 1, j + 1, cost + relabel(*a.node[i], *b.node[j], content));
      pairs.pop_back();
    }
  }
};

}  // namespace

double brute_force_ted(const TableTree& a, const TableTree& b, bool content) {
  Flat fa, fb;
  flatten(a, fa);
  flatten(b, fb);
  Search s{fa, fb, content, {}};
  s.run(0, 0, 0.0);
  return s.best;
}

TableTree random_tree(Rng& rng, int nodes) {
  static constexpr std::array<const char*, 5> kTags{"thead", "tbody", "tr", "td", "th"};
  static constexpr std::array<const char*, 6> kTexts{"", "a", "ab", "abc", "资产", "b c"};
  TableTree root;
  root.tag = "table";
  std::vector<TableTree*> all{&root};
  // Children are appended to arbitrary existing nodes; references stay valid
  // because every node's children vector is reserved up front.
  root.children.reserve(nodes);
  for (int k = 1; k < nodes; ++k) {
    TableTree* parent = all[rng.index(all.size())];
    TableTree child;
    child.tag = kTags[rng.index(kTags.size())];
    if (child.is_cell()) {
      child.text = kTexts[rng.index(kTexts.size())];
      if (rng.chance(0.2)) child.col_span = 2;
      if (rng.chance(0.2)) child.row_span = 2;
    }
    child.children.reserve(nodes);
    parent->children.push_back(std::move(child));
    all.push_back(&parent->children.back());
  }
  return root;
}

}  // namespace tabsynth::testing
