#include "blockctm/report.hpp"

#include <algorithm>
#include <cmath>

#include "blockctm/error.hpp"
#include "blockctm/text.hpp"

namespace blockctm::eval {

namespace {

constexpr const char* kCsvHeader = "block,fraction,classifier,statistic,value";
constexpr const char* kDiagnostic = "# diagnostic mode: training set equals test set";

std::string percent_label(double fraction) {
    const double pct = fraction * 100.0;
    const double rounded = std::round(pct);
    return std::abs(pct - rounded) < 1e-9 ? std::to_string(static_cast<long long>(rounded))
                                          : text::format_fixed(pct, 2);
}

template <class T>
void push_unique(std::vector<T>& v, const T& x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
}

}  // namespace

ReportFormat parse_report_format(const std::string& name) {
    if (name == "table") return ReportFormat::Table;
    if (name == "csv") return ReportFormat::Csv;
    throw ConfigError("unknown report format '" + name + "' (expected table or csv)");
}

std::string render_report(const EvalReport& report, ReportFormat format) {
    std::string out;
    if (report.train_equals_test) out += std::string(kDiagnostic) + "\n";

    if (format == ReportFormat::Csv) {
        out += std::string(kCsvHeader) + "\n";
        for (const EvalCell& c : report.cells) {
            const std::string prefix =
                std::to_string(c.blocks) + "," + text::format_exact(c.fraction) + "," + method_name(c.method) + ",";
            out += prefix + "max," + text::format_exact(c.max) + "\n";
            out += prefix + "min," + text::format_exact(c.min) + "\n";
            out += prefix + "avg," + text::format_exact(c.avg) + "\n";
            for (std::size_t r = 0; r < c.runs.size(); ++r) {
                out += prefix + "run" + std::to_string(r + 1) + "," + text::format_exact(c.runs[r]) + "\n";
            }
        }
        return out;
    }

    std::vector<int> blocks;
    std::vector<Method> methods;
    for (const EvalCell& c : report.cells) {
        push_unique(blocks, c.blocks);
        push_unique(methods, c.method);
    }
    out += "Block\tTraining Samples (%)\tAccuracy (%)";
    for (Method m : methods) out += "\t" + method_name(m);
    out += "\n";
    for (int b : blocks) {
        std::vector<double> fractions;
        for (const EvalCell& c : report.cells) {
            if (c.blocks == b) push_unique(fractions, c.fraction);
        }
        bool first_block_row = true;
        for (double f : fractions) {
            bool first_fraction_row = true;
            for (const char* stat : {"Max", "Min", "Avg"}) {
                out += first_block_row ? std::to_string(b) : "";
                out += "\t";
                out += first_fraction_row ? percent_label(f) : "";
                out += "\t";
                out += stat;
                for (Method m : methods) {
                    out += "\t";
                    const EvalCell* c = report.find(b, f, m);
                    if (c == nullptr) continue;
                    const double v = stat[1] == 'a' ? c->max : stat[1] == 'i' ? c->min : c->avg;
                    out += text::format_fixed(v, 2);
                }
                out += "\n";
                first_block_row = false;
                first_fraction_row = false;
            }
        }
    }
    return out;
}

EvalReport parse_report_csv(const std::string& csv) {
    EvalReport report;
    const std::vector<std::string> lines = text::split_lines(csv);
    std::size_t ln = 0;
    if (ln < lines.size() && lines[ln] == kDiagnostic) {
        report.train_equals_test = true;
        ++ln;
    }
    if (ln >= lines.size() || lines[ln] != kCsvHeader) throw FormatError("report csv: missing header");
    for (++ln; ln < lines.size(); ++ln) {
        if (lines[ln].empty()) continue;
        const std::string where = "report csv line " + std::to_string(ln + 1);
        const std::vector<std::string> f = text::split(lines[ln], ',');
        if (f.size() != 5) throw FormatError(where + ": expected 5 fields");
        const int blocks = static_cast<int>(text::parse_int(f[0], where));
        const double fraction = text::parse_double(f[1], where);
        const Method method = parse_method_name(f[2]);
        const double value = text::parse_double(f[4], where);

        EvalCell* cell = nullptr;
        for (EvalCell& c : report.cells) {
            if (c.blocks == blocks && c.fraction == fraction && c.method == method) cell = &c;
        }
        if (cell == nullptr) {
            report.cells.push_back(EvalCell{});
            cell = &report.cells.back();
            cell->blocks = blocks;
            cell->fraction = fraction;
            cell->method = method;
        }
        const std::string& stat = f[3];
        if (stat == "max") {
            cell->max = value;
        } else if (stat == "min") {
            cell->min = value;
        } else if (stat == "avg") {
            cell->avg = value;
        } else if (stat.rfind("run", 0) == 0) {
            const auto index = static_cast<std::size_t>(text::parse_int(stat.substr(3), where));
            if (index != cell->runs.size() + 1) throw FormatError(where + ": runs out of order");
            cell->runs.push_back(value);
        } else {
            throw FormatError(where + ": unknown statistic '" + stat + "'");
        }
    }
    return report;
}

}  // namespace blockctm::eval
