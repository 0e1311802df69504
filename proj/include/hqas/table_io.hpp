#pragma once

#include <string>
#include <vector>

#include "hqas/curve.hpp"
#include "json.hpp"

namespace hqas {

using json = nlohmann::json;

// Entries in output order: by (2g, n, labels).
std::vector<std::pair<FKey, Rat>> ordered_entries(const FTable& table);

// {"chi_max", "q_max", "crosscapped", "support": {"<alpha>": "w"},
//  "entries": [{"g": "p/2", "idx": [...], "value": "p/q"}]}.
// Labels are plain levels when every label is on component 1, else "alpha:q".
json table_to_json(const FTable& table);
// The same document with one compact entry per line.
std::string table_to_json_text(const FTable& table);
// Throws BadInput on malformed documents.
FTable table_from_json(const json& doc);

// Header "g,n,idx,value"; idx joins "alpha:q" labels with ';'.
std::string table_to_csv(const FTable& table);
// Reads entries only; completeness metadata is left at defaults.
FTable table_from_csv(const std::string& text);

// {"components": [{"r": int, "tau": {"<l>": "p/q"}}], "phi": [{"a": [alpha, l], "b": [beta, m], "value": "p/q"}]},
// with phi listed once per unordered pair. Throws BadInput.
LocalCurve curve_from_json(const json& doc);
json curve_to_json(const LocalCurve& curve);

}  // namespace hqas
