#pragma once

#include <string>
#include <vector>

#include "fsel/dataset.hpp"

namespace fsel::fixtures {

// Numeric-only dataset from columns; class names are c0, c1, ...
inline Dataset numeric_dataset(const std::vector<std::vector<double>>& columns, const std::vector<int>& labels,
                               int n_classes = -1) {
  if (n_classes < 0) n_classes = labels.empty() ? 1 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<Attribute> attrs;
  std::vector<Feature> feats;
  for (std::size_t j = 0; j < columns.size(); ++j) {
    Feature f;
    f.name = "a" + std::to_string(j);
    f.parent = j;
    f.values = columns[j];
    attrs.push_back({f.name, Group::School, false});
    feats.push_back(std::move(f));
  }
  std::vector<std::string> names;
  for (int c = 0; c < n_classes; ++c) names.push_back("c" + std::to_string(c));
  return Dataset(std::move(attrs), std::move(feats), labels, std::move(names));
}

// One nominal column built from integer codes.
inline Feature nominal_feature(const std::string& name, std::size_t parent, const std::vector<int>& codes) {
  Feature f;
  f.name = name;
  f.parent = parent;
  f.nominal = true;
  f.codes = codes;
  int mx = 0;
  for (int c : codes) mx = std::max(mx, c);
  for (int c = 0; c <= mx; ++c) f.categories.push_back("v" + std::to_string(c));
  return f;
}

inline std::string income_header_csv(const std::vector<std::string>& cols) {
  std::string s;
  for (std::size_t i = 0; i < cols.size(); ++i) s += (i ? "," : "") + cols[i];
  return s + "\n";
}

}  // namespace fsel::fixtures
