#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "desip/config.hpp"
#include "desip/report.hpp"

// Batch orchestration behind the CLI verbs. Each function performs one
// whole command and throws ValidationError for bad configuration or
// std::runtime_error for compute failures.

namespace desip {

// partition -> screen -> debias -> save; writes the debiased embedding and
// a diagnostics JSON document (counts, residuals, stage timings).
void run_debias(const RunConfig& cfg, std::ostream& log);

// Load the embedding at `embedding_path`, run every enabled metric against
// the original embedding named in the config, write the report. Metric
// failures are recorded in the report instead of aborting the run.
BiasReport run_eval(const RunConfig& cfg, const std::string& embedding_path,
                    std::ostream& log);

// Merge reports into comparison tables: `<out_prefix>.csv`,
// `<out_prefix>.txt` and one `<out_prefix>_pca_<i>.csv` per report that
// carries coordinates.
void run_report(const std::vector<std::string>& report_paths,
                const std::string& out_prefix, std::ostream& log);

}  // namespace desip
