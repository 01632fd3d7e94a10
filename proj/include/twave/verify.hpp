#pragma once

#include <string>
#include <vector>

#include "twave/io.hpp"

namespace twave {

struct CriterionInfo {
    int id = 0;
    std::vector<std::string> modules;  ///< matched by --only
    std::string title;
};

struct CriterionReport {
    int id = 0;
    std::vector<std::string> modules;
    std::string title;
    bool pass = false;
    Json metrics = Json::object();
    std::string detail;  ///< error text when the check threw
};

struct VerifyOptions {
    std::string only;   ///< module name; empty runs everything
    int criterion = 0;  ///< 1..12; 0 runs everything selected by `only`
    int threads = 0;    ///< sweep workers, 0 = default_threads()
};

/// Series residuals in exact rational arithmetic (when n and k are decimals
/// with denominators up to 1000) and relative to term magnitudes in floating point.
struct SeriesResidual {
    bool exact_available = false;
    bool exact_g_zero = false;
    bool exact_w_zero = false;
    bool exact_forward_zero = false;
    double float_g_rel = 0.0;
    double float_w_rel = 0.0;
    double float_w_fixed_max = 0.0;  ///< w - T[phi(w)], exactly zero by construction

    bool all_zero(double rel_tol = 1e-13) const;
};

SeriesResidual series_residual(const Params& params, int degree);

const std::vector<CriterionInfo>& criteria();

/// Runs one criterion; never throws for numerical failures.
CriterionReport run_criterion(int id, const VerifyOptions& opt = {});

/// Runs the selected criteria in id order. Criterion 12 reruns the others and
/// compares the serialized reports byte for byte.
std::vector<CriterionReport> run_verify(const VerifyOptions& opt = {});

/// Report without timings or host data, so equal runs serialize identically.
Json verify_json(const std::vector<CriterionReport>& reports, const VerifyOptions& opt);

/// "criterion 3 [dynsys] PASS  eigenvalues ..." one line per report.
std::string verify_line(const CriterionReport& r);

}  // namespace twave
