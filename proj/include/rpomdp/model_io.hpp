#pragma once

// Line-oriented text format for interval POMDPs.
//
//   states N          actions N          observations N
//   init S            obs S Z            cost S A R
//   trans S A S' LO HI
//   target S          goal S
//
// '#' starts a comment. Header records may appear in any order but each at
// most once. Costs default to 0. Every state needs an obs record and every
// state-action pair at least one trans record.

#include "rpomdp/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace rpomdp {

/// Throws ParseError (1-based line/column) on syntax errors and on semantic
/// errors, which reference the offending record.
IntervalPomdp parse_model(std::string_view text);

IntervalPomdp load_model(const std::filesystem::path& path);

/// Canonical text form; doubles are written with 17 significant digits so
/// parse_model(serialize_model(m)) == m.
std::string serialize_model(const IntervalPomdp& model);

void save_model(const IntervalPomdp& model, const std::filesystem::path& path);

} // namespace rpomdp
