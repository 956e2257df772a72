#pragma once
// util.hpp — small helpers shared by the test suites.

#include <ctlstar/formula.hpp>

#include <initializer_list>
#include <stdexcept>
#include <string>

namespace testutil {

/// Member index of a formula given by its concrete syntax.
inline std::size_t find_member(const ctlstar::ClosureSet& cl,
                               const std::string& text) {
  auto idx = cl.index_of(cl.table().parse(text));
  if (!idx) throw std::runtime_error("not a closure member: " + text);
  return *idx;
}

/// Builds a member set from concrete-syntax formulas.
inline ctlstar::MemberSet mk_set(const ctlstar::ClosureSet& cl,
                                 std::initializer_list<const char*> texts) {
  ctlstar::MemberSet s = cl.empty_set();
  for (const char* t : texts) s.set(find_member(cl, t));
  return s;
}

}  // namespace testutil
