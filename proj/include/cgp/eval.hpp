#ifndef CGP_EVAL_HPP
#define CGP_EVAL_HPP

#include <vector>

#include "cgp/data.hpp"
#include "cgp/network.hpp"

namespace cgp {

// Accuracy kept as an exact fraction; converted to a real only for reporting.
struct AccuracyCell {
    long correct = 0;
    long total = 0;
    double value() const { return total == 0 ? 0.0 : static_cast<double>(correct) / total; }
};

// Lower-triangular T x T record: cell(t, i) is the accuracy on task i after
// learning task t, defined for i <= t.
struct AccuracyMatrix {
    int num_tasks = 0;
    std::vector<std::vector<AccuracyCell>> rows;  // rows[t] has t + 1 cells

    static AccuracyMatrix with_tasks(int t);
    void set(int t, int i, AccuracyCell cell);
    const AccuracyCell& cell(int t, int i) const;
    bool complete() const;
};

// Fraction of argmax-correct predictions, ties broken toward the lowest
// class index.
AccuracyCell evaluate(const Network& net, const Matrix& test_x, const std::vector<int>& test_y,
                      int task);

struct AccBwt {
    double acc = 0.0;
    bool bwt_defined = false;
    double bwt = 0.0;
};

// ACC = mean of the final row; BWT = mean change of earlier-task accuracy
// after all training. BWT is undefined for a single task.
AccBwt acc_bwt(const AccuracyMatrix& m);

}  // namespace cgp

#endif
