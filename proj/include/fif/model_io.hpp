#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "fif/baseline_if.hpp"
#include "fif/dictionaries.hpp"
#include "fif/forest.hpp"
#include "fif/inner_products.hpp"

namespace fif {

inline constexpr int kModelFormatVersion = 1;

// Spec objects as they appear in config and model files. Parsers reject unknown keys.

nlohmann::json to_json(const InnerProductSpec& spec);
InnerProductSpec inner_product_from_json(const nlohmann::json& j);
/// Accepts one object or a per-channel list.
std::vector<InnerProductSpec> inner_products_from_json(const nlohmann::json& j);

nlohmann::json to_json(const DictionarySpec& spec);
DictionarySpec dictionary_from_json(const nlohmann::json& j);

nlohmann::json to_json(const AtomParams& params);
AtomParams atom_from_json(const nlohmann::json& j);

/// Model file content: config, grid, trees in preorder, atom parameters and c(psi).
/// Internal nodes are [size, atom, kappa], leaves [size]; depths follow from the order.
nlohmann::json forest_to_json(const FIForest& forest);
FIForest forest_from_json(const nlohmann::json& j);

nlohmann::json baseline_to_json(const IsolationForest& forest);
IsolationForest baseline_from_json(const nlohmann::json& j);

nlohmann::json read_json(const std::filesystem::path& path);
/// Compact dump with a trailing newline; identical models give identical bytes.
void write_json(const nlohmann::json& j, const std::filesystem::path& path);

/// Throws ConfigError naming the first key of `j` not listed in `allowed`.
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed, const std::string& where);

}  // namespace fif
