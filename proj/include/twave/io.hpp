#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "twave/bvp.hpp"
#include "twave/dynsys.hpp"
#include "twave/match.hpp"
#include "twave/series.hpp"
#include "twave/shoot.hpp"

namespace twave {

using Json = nlohmann::ordered_json;

/// 17 significant digits, enough to round-trip a double. NaN prints as "nan".
std::string fmt17(double x);

/// Writes to a temporary sibling and renames it over `path`.
void write_atomic(const std::string& path, const std::string& content);

std::string profile_csv(const Profile& p);               ///< H,psi,dpsi
std::string sweep_csv(const std::vector<SweepRow>& rows); ///< k,b_cg,B_cg,dB_dk
std::string trajectory_csv(const Trajectory& tr);        ///< s,r,q,p
std::string law_csv(const std::vector<XSample>& xs);     ///< x,dHdx_cubed,ln_x
std::string grid_csv(const GridFn& f);                   ///< H,psi
std::string series_csv(const Series3& s, bool with_sigma); ///< j,l[,p],value

Json to_json(const Params& p);
Json to_json(const BEstimate& b);
Json to_json(const MatchResult& m);
Json to_json(const std::vector<SweepRow>& rows);
Json to_json(const BvpSolution& s);
Json to_json(const CrossValidation& c);

/// Doubles go through this so NaN and infinities stay valid JSON (as strings).
Json num(double x);

}  // namespace twave
