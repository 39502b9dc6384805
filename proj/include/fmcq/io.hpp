#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "fmcq/model.hpp"

namespace fmcq {

enum class ModelFormat { kSxfm, kNative };

std::string_view to_string(ModelFormat f);
/// Accepts "sxfm" and "native"; throws Error otherwise.
ModelFormat parse_format(std::string_view name);

struct ModelDocument {
  ModelFormat format = ModelFormat::kNative;
  std::string source;
  FeatureModel model;
};

/// SXFM subset: :r, :m, :o, :g [1,1] (alternative), :g [1,*] (or) and CNF
/// clauses shaped like requires (~a or b) or excludes (~a or ~b).
///
/// Display names that clash after slugging get the SXFM id appended. A group
/// with a single member is read as a mandatory child, and [1,k] with k at
/// least the member count is read as an or-group. Throws ParseError for
/// malformed markup and UnsupportedConstruct for anything else outside the
/// subset.
FeatureModel parse_sxfm(std::string_view text);

/// Indented native format, see serialize_native(). Throws ParseError (with
/// location) for malformed lines, dangling indentation, duplicate names and
/// unknown constraint operands.
FeatureModel parse_native(std::string_view text);

/// Canonical native text:
///
///   feature Survey root
///     feature Pricing mandatory
///     group alternative
///       feature License
///   constraints
///     requires t st
///
/// Names with whitespace, quotes or '#' are double-quoted.
std::string serialize_native(const FeatureModel& fm);

/// Content sniffing: text starting with '<' is SXFM.
ModelFormat detect_format(std::string_view text);

ModelDocument parse_document(std::string text, std::optional<ModelFormat> format = std::nullopt);

/// Reads and parses a file. Throws NotFound when it cannot be opened.
ModelDocument load_model(const std::filesystem::path& path, std::optional<ModelFormat> format = std::nullopt);

}  // namespace fmcq
