#pragma once
// lasso_oracle.hpp — independent linear-time semantics on ultimately periodic
// words, shared by the hue and model test suites.  Letters are plain atom
// sets; Until is evaluated by walking the word, which is exact on a lasso
// because a witness, if any, appears within one traversal of every position.

#include <ctlstar/formula.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace testoracle {

using Letters = std::vector<std::set<std::string>>;

class LassoEval {
 public:
  LassoEval(const ctlstar::FormulaTable& t, Letters letters,
            std::size_t prefix_len)
      : t_(t), word_(std::move(letters)), p_(prefix_len) {}

  bool holds(ctlstar::FormulaId f, std::size_t pos) { return truth(f)[pos] != 0; }

 private:
  std::size_t n() const { return word_.size(); }
  std::size_t next(std::size_t i) const { return i + 1 < n() ? i + 1 : p_; }

  std::vector<char>& truth(ctlstar::FormulaId f) {
    using ctlstar::Kind;
    auto it = memo_.find(f);
    if (it != memo_.end()) return it->second;
    std::vector<char> v(n(), 0);
    switch (t_.kind(f)) {
      case Kind::Atom:
        for (std::size_t i = 0; i < n(); ++i)
          v[i] = word_[i].count(t_.atom_name(f)) > 0;
        break;
      case Kind::True:
        v.assign(n(), 1);
        break;
      case Kind::Neg: {
        auto& c = truth(t_.node(f).a);
        for (std::size_t i = 0; i < n(); ++i) v[i] = !c[i];
        break;
      }
      case Kind::And: {
        auto& a = truth(t_.node(f).a);
        auto& b = truth(t_.node(f).b);
        for (std::size_t i = 0; i < n(); ++i) v[i] = a[i] && b[i];
        break;
      }
      case Kind::Next: {
        auto& c = truth(t_.node(f).a);
        for (std::size_t i = 0; i < n(); ++i) v[i] = c[next(i)];
        break;
      }
      case Kind::Until: {
        auto& a = truth(t_.node(f).a);
        auto& b = truth(t_.node(f).b);
        for (std::size_t i = 0; i < n(); ++i) {
          std::size_t j = i;
          for (std::size_t step = 0; step <= n(); ++step) {
            if (b[j]) {
              v[i] = 1;
              break;
            }
            if (!a[j]) break;
            j = next(j);
          }
        }
        break;
      }
      case Kind::All:
        throw std::logic_error("lasso oracle: A-free formulas only");
    }
    return memo_.emplace(f, std::move(v)).first->second;
  }

  const ctlstar::FormulaTable& t_;
  Letters word_;
  std::size_t p_;
  std::unordered_map<ctlstar::FormulaId, std::vector<char>> memo_;
};

/// Searches all lassos with prefix+loop length <= max_len over atoms {p, q}
/// for one satisfying `f` at its start; returns (letters, prefix_len).
inline std::optional<std::pair<Letters, std::size_t>> find_bounded_lasso(
    const ctlstar::FormulaTable& t, ctlstar::FormulaId f, std::size_t max_len) {
  for (std::size_t total = 1; total <= max_len; ++total) {
    std::uint64_t combos = std::uint64_t{1} << (2 * total);
    for (std::uint64_t w = 0; w < combos; ++w) {
      Letters letters(total);
      for (std::size_t i = 0; i < total; ++i) {
        if ((w >> (2 * i)) & 1) letters[i].insert("p");
        if ((w >> (2 * i)) & 2) letters[i].insert("q");
      }
      for (std::size_t loop = 1; loop <= total; ++loop) {
        LassoEval ev(t, letters, total - loop);
        if (ev.holds(f, 0))
          return std::make_pair(std::move(letters), total - loop);
      }
    }
  }
  return std::nullopt;
}

inline bool bounded_lasso_sat(const ctlstar::FormulaTable& t,
                              ctlstar::FormulaId f, std::size_t max_len) {
  return find_bounded_lasso(t, f, max_len).has_value();
}

}  // namespace testoracle
