#ifndef CGP_ARTIFACTS_HPP
#define CGP_ARTIFACTS_HPP

#include <string>
#include <vector>

#include "cgp/eval.hpp"
#include "cgp/snapshot.hpp"
#include "cgp/trainer.hpp"

namespace cgp {

// layer,basis_count,dim,fraction,saturated — the inspect subcommand's CSV.
std::string memory_report_csv(const MemorySnapshot& snap);

// Accuracy matrix rows (t,i,correct,total,accuracy) followed by summary rows
// with ACC/BWT in percent, two decimals. BWT is "na" for a single task.
std::string accuracy_csv(const AccuracyMatrix& m);

// task,epoch,loss
std::string loss_csv(const std::vector<TaskResult>& tasks);

// Per-task instrumentation: projection alignment, memory defect, basis counts.
std::string run_stats_csv(const std::vector<TaskResult>& tasks, int num_layers);

// Per-class consolidation decisions (branch taken, match, columns).
std::string consolidation_csv(const std::vector<TaskResult>& tasks);

// Average-accuracy-after-each-task curve as a static SVG.
std::string accuracy_curve_svg(const AccuracyMatrix& m);

struct SummaryRow {
    std::string variant;
    std::vector<double> acc;  // one per seed
    std::vector<double> bwt;
    std::vector<bool> bwt_defined;
};

// variant,acc_seed_<s>...,bwt_seed_<s>...,acc_mean,bwt_mean
std::string summary_csv(const std::vector<SummaryRow>& rows,
                        const std::vector<std::uint64_t>& seeds);

}  // namespace cgp

#endif
