#pragma once

#include <compare>
#include <string>

namespace zeno {

enum class LabelFamily { interval, rectangle, annulus, shell, mask };

/// Quantum numbers of one eigenmode. Unused slots stay zero:
/// interval(n), rectangle(n,m), annulus(n,l), shell(n,l,m), mask(k in n).
struct QuantumNumberLabel {
  LabelFamily family = LabelFamily::interval;
  int n = 1;
  int m = 0;
  int l = 0;

  static QuantumNumberLabel interval(int n) { return {LabelFamily::interval, n, 0, 0}; }
  static QuantumNumberLabel rectangle(int n, int m) { return {LabelFamily::rectangle, n, m, 0}; }
  static QuantumNumberLabel annulus(int n, int l) { return {LabelFamily::annulus, n, 0, l}; }
  static QuantumNumberLabel shell(int n, int l, int m) { return {LabelFamily::shell, n, m, l}; }
  static QuantumNumberLabel mask(int k) { return {LabelFamily::mask, k, 0, 0}; }

  /// Throws StructuralError when indices are out of range for the family.
  void validate() const;
  std::string str() const;

  auto operator<=>(const QuantumNumberLabel&) const = default;
};

std::string to_string(LabelFamily family);

}  // namespace zeno
