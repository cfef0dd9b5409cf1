#include "zeno/labels.hpp"

#include <cstdlib>

#include "zeno/errors.hpp"

namespace zeno {

std::string to_string(LabelFamily family) {
  switch (family) {
    case LabelFamily::interval: return "interval";
    case LabelFamily::rectangle: return "rectangle";
    case LabelFamily::annulus: return "annulus";
    case LabelFamily::shell: return "shell";
    case LabelFamily::mask: return "mask";
  }
  return "unknown";
}

void QuantumNumberLabel::validate() const {
  if (n < 1) throw StructuralError("radial or box index n must be positive", "label.n");
  switch (family) {
    case LabelFamily::rectangle:
      if (m < 1) throw StructuralError("box index m must be positive", "label.m");
      break;
    case LabelFamily::shell:
      if (l < 0 || std::abs(m) > l) throw StructuralError("shell label needs l >= 0 and |m| <= l", "label.m");
      break;
    default:
      break;
  }
}

std::string QuantumNumberLabel::str() const {
  switch (family) {
    case LabelFamily::interval: return "(" + std::to_string(n) + ")";
    case LabelFamily::rectangle: return "(" + std::to_string(n) + "," + std::to_string(m) + ")";
    case LabelFamily::annulus: return "(n=" + std::to_string(n) + ",l=" + std::to_string(l) + ")";
    case LabelFamily::shell:
      return "(n=" + std::to_string(n) + ",l=" + std::to_string(l) + ",m=" + std::to_string(m) + ")";
    case LabelFamily::mask: return "[" + std::to_string(n) + "]";
  }
  return "?";
}

}  // namespace zeno
