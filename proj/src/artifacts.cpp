#include "cgp/artifacts.hpp"

#include <cmath>

#include "cgp/io_util.hpp"

namespace cgp {

std::string memory_report_csv(const MemorySnapshot& snap) {
    std::string out = "layer,basis_count,dim,fraction,saturated\n";
    for (std::size_t l = 0; l < snap.memory.layers.size(); ++l) {
        const BasisLayer& layer = snap.memory.layers[l];
        const double frac = layer.dim > 0 ? static_cast<double>(layer.count()) / layer.dim : 0.0;
        out += std::to_string(l) + "," + std::to_string(layer.count()) + "," +
               std::to_string(layer.dim) + "," + format_double(frac) + "," +
               (layer.full() ? "1" : "0") + "\n";
    }
    return out;
}

std::string accuracy_csv(const AccuracyMatrix& m) {
    std::string out = "t,i,correct,total,accuracy\n";
    for (int t = 0; t < m.num_tasks; ++t)
        for (int i = 0; i <= t; ++i) {
            const AccuracyCell& c = m.cell(t, i);
            out += std::to_string(t) + "," + std::to_string(i) + "," + std::to_string(c.correct) +
                   "," + std::to_string(c.total) + "," + format_double(c.value()) + "\n";
        }
    const AccBwt summary = acc_bwt(m);
    out += "ACC," + format_percent(summary.acc) + "\n";
    out += "BWT," + (summary.bwt_defined ? format_percent(summary.bwt) : std::string("na")) + "\n";
    return out;
}

std::string loss_csv(const std::vector<TaskResult>& tasks) {
    std::string out = "task,epoch,loss\n";
    for (const TaskResult& t : tasks)
        for (std::size_t e = 0; e < t.epoch_losses.size(); ++e)
            out += std::to_string(t.task) + "," + std::to_string(e) + "," +
                   format_double(t.epoch_losses[e]) + "\n";
    return out;
}

std::string run_stats_csv(const std::vector<TaskResult>& tasks, int num_layers) {
    std::string out = "task,max_update_alignment,ortho_defect,saturated";
    for (int l = 0; l < num_layers; ++l) out += ",basis_l" + std::to_string(l);
    out += "\n";
    for (const TaskResult& t : tasks) {
        out += std::to_string(t.task) + "," + format_double(t.max_update_alignment) + "," +
               format_double(t.consolidation.ortho_defect) + "," +
               (t.consolidation.saturated ? "1" : "0");
        for (int l = 0; l < num_layers; ++l)
            out += "," + (l < static_cast<int>(t.memory_columns.size())
                              ? std::to_string(t.memory_columns[static_cast<std::size_t>(l)])
                              : std::string("0"));
        out += "\n";
    }
    return out;
}

std::string consolidation_csv(const std::vector<TaskResult>& tasks) {
    std::string out = "task,class,branch,matched_class,similarity,new_columns,shared_columns\n";
    for (const TaskResult& t : tasks)
        for (const ClassConsolidation& c : t.consolidation.classes) {
            const char* branch = c.branch == MergeBranch::fresh ? "fresh"
                                 : c.branch == MergeBranch::merged_concat ? "merged_concat"
                                                                          : "merged_shared";
            out += std::to_string(t.task) + "," + std::to_string(c.class_id) + "," + branch + "," +
                   std::to_string(c.matched_class) + "," +
                   (c.max_similarity < -1.5 ? std::string("na") : format_double(c.max_similarity)) +
                   "," + std::to_string(c.new_columns) + "," + std::to_string(c.shared_columns) +
                   "\n";
        }
    return out;
}

std::string accuracy_curve_svg(const AccuracyMatrix& m) {
    const int width = 480, height = 320, margin = 48;
    const int plot_w = width - 2 * margin, plot_h = height - 2 * margin;
    const int t_count = m.num_tasks;

    std::string svg =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
        "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " + std::to_string(width) +
        " " + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<line x1=\"" + std::to_string(margin) + "\" y1=\"" + std::to_string(height - margin) +
           "\" x2=\"" + std::to_string(width - margin) + "\" y2=\"" +
           std::to_string(height - margin) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + std::to_string(margin) + "\" y1=\"" + std::to_string(margin) +
           "\" x2=\"" + std::to_string(margin) + "\" y2=\"" + std::to_string(height - margin) +
           "\" stroke=\"black\"/>\n";
    svg += "<text x=\"" + std::to_string(width / 2) + "\" y=\"" + std::to_string(height - 12) +
           "\" text-anchor=\"middle\" font-size=\"12\">tasks learned</text>\n";
    svg += "<text x=\"14\" y=\"" + std::to_string(height / 2) +
           "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " +
           std::to_string(height / 2) + ")\">average accuracy (%)</text>\n";

    auto xpos = [&](int t) {
        return t_count > 1 ? margin + plot_w * t / (t_count - 1) : margin + plot_w / 2;
    };
    auto ypos = [&](double acc) {
        return height - margin - static_cast<int>(std::lround(acc * plot_h));
    };

    std::string points;
    for (int t = 0; t < t_count; ++t) {
        double mean = 0.0;
        for (int i = 0; i <= t; ++i) mean += m.cell(t, i).value();
        mean /= (t + 1);
        points += std::to_string(xpos(t)) + "," + std::to_string(ypos(mean)) + " ";
        svg += "<circle cx=\"" + std::to_string(xpos(t)) + "\" cy=\"" +
               std::to_string(ypos(mean)) + "\" r=\"3\" fill=\"#1f5fa8\"/>\n";
        svg += "<text x=\"" + std::to_string(xpos(t)) + "\" y=\"" +
               std::to_string(height - margin + 16) +
               "\" text-anchor=\"middle\" font-size=\"10\">" + std::to_string(t + 1) + "</text>\n";
    }
    if (t_count > 1)
        svg += "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"" +
               points + "\"/>\n";
    for (int g = 0; g <= 4; ++g) {
        const double frac = g / 4.0;
        svg += "<text x=\"" + std::to_string(margin - 6) + "\" y=\"" +
               std::to_string(ypos(frac) + 4) + "\" text-anchor=\"end\" font-size=\"10\">" +
               std::to_string(g * 25) + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

std::string summary_csv(const std::vector<SummaryRow>& rows,
                        const std::vector<std::uint64_t>& seeds) {
    std::string out = "variant";
    for (std::uint64_t s : seeds) out += ",acc_seed_" + std::to_string(s);
    for (std::uint64_t s : seeds) out += ",bwt_seed_" + std::to_string(s);
    out += ",acc_mean,bwt_mean\n";
    for (const SummaryRow& row : rows) {
        out += row.variant;
        double acc_sum = 0.0;
        for (std::size_t i = 0; i < row.acc.size(); ++i) {
            out += "," + format_percent(row.acc[i]);
            acc_sum += row.acc[i];
        }
        double bwt_sum = 0.0;
        bool any_bwt = false;
        for (std::size_t i = 0; i < row.bwt.size(); ++i) {
            if (row.bwt_defined[i]) {
                out += "," + format_percent(row.bwt[i]);
                bwt_sum += row.bwt[i];
                any_bwt = true;
            } else {
                out += ",na";
            }
        }
        out += "," + format_percent(acc_sum / static_cast<double>(row.acc.size()));
        out += "," + (any_bwt ? format_percent(bwt_sum / static_cast<double>(row.bwt.size()))
                              : std::string("na"));
        out += "\n";
    }
    return out;
}

}  // namespace cgp
