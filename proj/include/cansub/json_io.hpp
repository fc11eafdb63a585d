#pragma once

#include <string>

#include <json.hpp>

#include "cansub/canonical.hpp"
#include "cansub/points.hpp"
#include "cansub/verify.hpp"

namespace cansub {

using ordered_json = nlohmann::ordered_json;

/// Canonical module schema:
/// {"p", "field_degree", "field_poly", "e", "cbar0", "h", "precision", "A"}
/// with A row-major and each series an array of [exponent, [coords]] pairs.
/// Round-trips bit-exactly through dump().
ordered_json module_to_json(const KisinModule& M);
KisinModule module_from_json(const ordered_json& j);

ordered_json series_to_json(const TruncSeries& s);
ordered_json puiseux_to_json(const PuiseuxSeries& s);

ordered_json invariants_to_json(const KisinModule& M);
ordered_json cansub_to_json(const KisinModule& M, const CanSubResult& res);
ordered_json points_to_json(const KisinModule& M, const PointSet& ps);
ordered_json ramify_to_json(const KisinModule& M, const PointSet& ps);
std::string breaks_csv(const KisinModule& M, const RamificationReport& rep, const Rat& w);
ordered_json report_to_json(const VerifyReport& rep, const std::string& module_sha256,
                            bool with_timings);

std::string sha256_hex(const std::string& data);

} // namespace cansub
