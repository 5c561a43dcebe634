#pragma once

#include <string>

#include "vrec/roc.hpp"

namespace vrec {

// Standalone SVG plot of a ROC curve with the chance diagonal.
std::string roc_svg(const RocCurve& curve, const std::string& title);

}  // namespace vrec
