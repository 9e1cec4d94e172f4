#pragma once

#include <string>
#include <vector>

namespace dlasso::svg {

// Freedman-Diaconis bin edges; degenerate samples collapse to a single bin.
std::vector<double> fd_bin_edges(const std::vector<double>& pooled);

// Self-contained histogram (no external assets); deterministic output for
// identical inputs.
std::string histogram(const std::vector<double>& values,
                      const std::vector<double>& edges,
                      const std::string& title);

struct BoxGroup {
  std::string label;
  std::vector<double> values;
};

// Grouped boxplot: median, quartile box, 1.5 IQR whiskers, outlier dots.
std::string boxplot(const std::vector<BoxGroup>& groups,
                    const std::string& title);

}  // namespace dlasso::svg
