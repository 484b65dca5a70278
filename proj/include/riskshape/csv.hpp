// Scenario dataset ingestion: CSV with a leading label column.
#pragma once

#include <string>
#include <vector>

#include "riskshape/distribution.hpp"

namespace riskshape {

struct Dataset {
    ScenarioMatrix scenarios;
    std::vector<std::string> row_labels;  // e.g. years
    std::string path;
};

// Header `label,<asset names...>`; every data cell must parse as a finite
// decimal.  Throws CsvError naming the offending row/column.
Dataset load_csv(const std::string& path);

// Inverse of load_csv up to text formatting; values round-trip exactly.
void save_csv(const Dataset& ds, const std::string& path);

}  // namespace riskshape
