#pragma once

#include "model.hpp"

#include <map>
#include <string>
#include <vector>

namespace conjlab {

struct ExpectedValue {
    std::string name;
    double value;
    std::string oracle; // where the number comes from
};

struct CatalogEntry {
    std::string id;
    Model model;
    std::map<std::string, double> params; // resolved (defaults + overrides)
    std::vector<ExpectedValue> expected;
};

/// ids: scalar-exp-forced (S1), saddle-2d-forced (S2), scalar-exp-sin (S3),
/// nonuniform-exp (S4); short aliases accepted.
CatalogEntry get_entry(const std::string& id,
                       const std::map<std::string, double>& overrides = {});

std::vector<std::string> catalog_ids();

} // namespace conjlab
