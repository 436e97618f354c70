#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "trivac/common.hpp"

namespace trivac {

/// One smeared operator in an ordered product: detector id and frequency
/// sign. The position in the product is the index in the operator list.
struct OperatorLabel {
  Det id;
  int sign;  ///< -1 or +1
};

inline std::string label_string(std::span<const OperatorLabel> ops) {
  std::string ids = "d_", signs = "^";
  for (const auto& op : ops) {
    ids += det_name(op.id);
    signs += op.sign > 0 ? '+' : '-';
  }
  return ids + signs;
}

/// Two-point contraction values. The first argument is the operator standing
/// earlier in the product; for timelike self pairs the order matters.
struct PairFunction {
  std::function<cplx(const OperatorLabel&, const OperatorLabel&)> value;
};

/// All perfect matchings of {0..n-1} into unordered pairs, each pair stored
/// (min, max), in deterministic lexicographic order. (n-1)!! of them.
inline std::vector<std::vector<std::pair<int, int>>> pairings(int n) {
  if (n < 0 || n % 2 != 0)
    throw ConfigError("pairings: need an even nonnegative count");
  if (n > 12) throw ConfigError("pairings: supported up to 12 operators");
  std::vector<std::vector<std::pair<int, int>>> out;
  std::vector<std::pair<int, int>> current;
  std::vector<bool> used(n, false);
  auto rec = [&](auto&& self) -> void {
    int first = -1;
    for (int i = 0; i < n; ++i)
      if (!used[i]) {
        first = i;
        break;
      }
    if (first < 0) {
      out.push_back(current);
      return;
    }
    used[first] = true;
    for (int j = first + 1; j < n; ++j) {
      if (used[j]) continue;
      used[j] = true;
      current.emplace_back(first, j);
      self(self);
      current.pop_back();
      used[j] = false;
    }
    used[first] = false;
  };
  rec(rec);
  return out;
}

/// Vacuum moment of an ordered operator string: sum over perfect matchings
/// of products of pair values, left operator of each pair the one earlier in
/// the product. Odd strings vanish.
inline cplx npoint(std::span<const OperatorLabel> ops,
                   const PairFunction& pairs) {
  const int n = static_cast<int>(ops.size());
  if (n % 2 != 0) return cplx(0.0, 0.0);
  if (n == 0) return cplx(1.0, 0.0);
  if (!pairs.value) throw ConfigError("npoint: pair function not set");
  cplx sum(0.0, 0.0);
  for (const auto& matching : pairings(n)) {
    cplx prod(1.0, 0.0);
    for (const auto& [l, r] : matching) prod *= pairs.value(ops[l], ops[r]);
    sum += prod;
  }
  return sum;
}

inline cplx npoint(std::initializer_list<OperatorLabel> ops,
                   const PairFunction& pairs) {
  return npoint(std::span<const OperatorLabel>(ops.begin(), ops.size()),
                pairs);
}

/// Symbolic pairing expansion, e.g.
/// "d_BCBC^--++ = d_BC^--*d_BC^++ + d_BB^-+*d_CC^-+ + d_BC^-+*d_CB^-+".
inline std::string expand_string(std::span<const OperatorLabel> ops) {
  const int n = static_cast<int>(ops.size());
  std::string out = label_string(ops) + " = ";
  if (n % 2 != 0) return out + "0";
  bool first_term = true;
  for (const auto& matching : pairings(n)) {
    if (!first_term) out += " + ";
    first_term = false;
    bool first_factor = true;
    for (const auto& [l, r] : matching) {
      if (!first_factor) out += "*";
      first_factor = false;
      out += "d_";
      out += det_name(ops[l].id);
      out += det_name(ops[r].id);
      out += "^";
      out += ops[l].sign > 0 ? '+' : '-';
      out += ops[r].sign > 0 ? '+' : '-';
    }
  }
  return out;
}

/// Parse "d_BCBC^--++" (leading "d_" optional) into an operator list.
inline std::vector<OperatorLabel> parse_label_string(const std::string& s) {
  std::string body = s;
  if (body.rfind("d_", 0) == 0) body = body.substr(2);
  const auto caret = body.find('^');
  if (caret == std::string::npos)
    throw ConfigError("operator string needs '^' between ids and signs: " + s);
  const std::string ids = body.substr(0, caret);
  const std::string signs = body.substr(caret + 1);
  if (ids.size() != signs.size())
    throw ConfigError("operator string: id and sign counts differ: " + s);
  std::vector<OperatorLabel> ops;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    int sg;
    if (signs[k] == '+')
      sg = +1;
    else if (signs[k] == '-')
      sg = -1;
    else
      throw ConfigError(std::string("operator string: bad sign '") +
                        signs[k] + "'");
    ops.push_back({det_from_char(ids[k]), sg});
  }
  return ops;
}

/// The higher-point vacuum moments entering the second-order three-detector
/// density matrix, computed from a pair function by Wick expansion. Field
/// names spell the operator string: ids in product order, then signs.
struct DerivedAmplitudes {
  cplx bcbc_mmpp{};    ///< (B- C- B+ C+)
  cplx cabc_mmpp{};    ///< (C- A- B+ C+)
  cplx abbc_mmpp{};    ///< (A- B- B+ C+)
  cplx caca_mmpp{};    ///< (C- A- C+ A+)
  cplx abca_mmpp{};    ///< (A- B- C+ A+)
  cplx abab_mmpp{};    ///< (A- B- A+ B+)
  cplx abcc_mmmp{};    ///< (A- B- C- C+)
  cplx abcb_mmmp{};    ///< (A- B- C- B+)
  cplx abca_mmmp{};    ///< (A- B- C- A+)
  cplx abcabc_mmmppp{};  ///< (A- B- C- A+ B+ C+)
  std::string digest;
};

inline DerivedAmplitudes derived_amplitudes(const PairFunction& pairs,
                                            const std::string& digest = {}) {
  using D = Det;
  DerivedAmplitudes out;
  out.digest = digest;
  out.bcbc_mmpp = npoint({{D::B, -1}, {D::C, -1}, {D::B, +1}, {D::C, +1}},
                         pairs);
  out.cabc_mmpp = npoint({{D::C, -1}, {D::A, -1}, {D::B, +1}, {D::C, +1}},
                         pairs);
  out.abbc_mmpp = npoint({{D::A, -1}, {D::B, -1}, {D::B, +1}, {D::C, +1}},
                         pairs);
  out.caca_mmpp = npoint({{D::C, -1}, {D::A, -1}, {D::C, +1}, {D::A, +1}},
                         pairs);
  out.abca_mmpp = npoint({{D::A, -1}, {D::B, -1}, {D::C, +1}, {D::A, +1}},
                         pairs);
  out.abab_mmpp = npoint({{D::A, -1}, {D::B, -1}, {D::A, +1}, {D::B, +1}},
                         pairs);
  out.abcc_mmmp = npoint({{D::A, -1}, {D::B, -1}, {D::C, -1}, {D::C, +1}},
                         pairs);
  out.abcb_mmmp = npoint({{D::A, -1}, {D::B, -1}, {D::C, -1}, {D::B, +1}},
                         pairs);
  out.abca_mmmp = npoint({{D::A, -1}, {D::B, -1}, {D::C, -1}, {D::A, +1}},
                         pairs);
  out.abcabc_mmmppp = npoint({{D::A, -1},
                              {D::B, -1},
                              {D::C, -1},
                              {D::A, +1},
                              {D::B, +1},
                              {D::C, +1}},
                             pairs);
  return out;
}

}  // namespace trivac
