#include "cgp/eval.hpp"

#include <string>

#include "cgp/error.hpp"

namespace cgp {

AccuracyMatrix AccuracyMatrix::with_tasks(int t) {
    AccuracyMatrix m;
    m.num_tasks = t;
    m.rows.resize(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) m.rows[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(i) + 1);
    return m;
}

void AccuracyMatrix::set(int t, int i, AccuracyCell cell) {
    if (t < 0 || t >= num_tasks || i < 0 || i > t)
        throw contract_error("AccuracyMatrix::set: index outside the lower triangle");
    rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)] = cell;
}

const AccuracyCell& AccuracyMatrix::cell(int t, int i) const {
    if (t < 0 || t >= num_tasks || i < 0 || i > t)
        throw contract_error("AccuracyMatrix::cell: index outside the lower triangle");
    return rows[static_cast<std::size_t>(t)][static_cast<std::size_t>(i)];
}

bool AccuracyMatrix::complete() const {
    for (const auto& row : rows)
        for (const auto& c : row)
            if (c.total == 0) return false;
    return num_tasks > 0;
}

AccuracyCell evaluate(const Network& net, const Matrix& test_x, const std::vector<int>& test_y,
                      int task) {
    if (test_x.rows == 0) throw contract_error("evaluate: empty test set");
    if (static_cast<int>(test_y.size()) != test_x.rows)
        throw contract_error("evaluate: label count mismatch");
    ForwardTrace trace = forward(net, test_x, task);
    AccuracyCell cell;
    cell.total = test_x.rows;
    for (int i = 0; i < trace.logits.rows; ++i) {
        const double* row = trace.logits.row_ptr(i);
        int arg = 0;
        for (int c = 1; c < trace.logits.cols; ++c)
            if (row[c] > row[arg]) arg = c;
        if (arg == test_y[static_cast<std::size_t>(i)]) ++cell.correct;
    }
    return cell;
}

AccBwt acc_bwt(const AccuracyMatrix& m) {
    if (!m.complete()) throw contract_error("acc_bwt: accuracy matrix is incomplete");
    const int t = m.num_tasks;
    AccBwt out;
    double acc = 0.0;
    for (int i = 0; i < t; ++i) acc += m.cell(t - 1, i).value();
    out.acc = acc / t;
    if (t > 1) {
        double bwt = 0.0;
        for (int i = 0; i < t - 1; ++i) bwt += m.cell(t - 1, i).value() - m.cell(i, i).value();
        out.bwt = bwt / (t - 1);
        out.bwt_defined = true;
    }
    return out;
}

}  // namespace cgp
