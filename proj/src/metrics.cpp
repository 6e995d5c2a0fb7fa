#include "nliswap/metrics.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace nliswap {

using nlohmann::json;

namespace {

class MetricsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::string list_offenders(const std::vector<std::string>& ids) {
    std::string out;
    const std::size_t shown = std::min<std::size_t>(ids.size(), 10);
    for (std::size_t i = 0; i < shown; ++i) {
        if (i) out += ", ";
        out += ids[i];
    }
    if (ids.size() > shown)
        out += ", ... (" + std::to_string(ids.size() - shown) + " more)";
    return out;
}

void check_alignment(const Corpus& corpus, const PredictionSet& predictions) {
    std::vector<std::string> missing;
    for (const auto& pair : corpus.pairs)
        if (!predictions.entries.count(pair.id)) missing.push_back(pair.id);
    if (!missing.empty())
        throw MetricsError("ids without predictions: " +
                           list_offenders(missing));
    if (predictions.entries.size() != corpus.pairs.size()) {
        std::set<std::string> corpus_ids;
        for (const auto& pair : corpus.pairs) corpus_ids.insert(pair.id);
        std::vector<std::string> extra;
        for (const auto& [id, label] : predictions.entries)
            if (!corpus_ids.count(id)) extra.push_back(id);
        std::sort(extra.begin(), extra.end());
        throw MetricsError("predictions for unknown ids: " +
                           list_offenders(extra));
    }
}

}  // namespace

EvalReport evaluate(const Corpus& corpus, const PredictionSet& predictions) {
    check_alignment(corpus, predictions);
    EvalReport report;
    for (const auto& pair : corpus.pairs) {
        const auto i = label_index(pair.gold);
        ++report.total[i];
        if (predictions.entries.at(pair.id) == pair.gold) ++report.correct[i];
    }
    return report;
}

SwapDiffReport swap_diff(const EvalReport& original, const EvalReport& swapped,
                         const PatternThresholds& thresholds) {
    SwapDiffReport report;
    for (const auto l : kAllLabels) {
        const auto i = label_index(l);
        if (original.total[i] == 0 || swapped.total[i] == 0)
            throw MetricsError("swap_diff needs all three labels in both "
                               "reports; \"" +
                               label_name(l) + "\" has no pairs");
        report.original[i] = original.accuracy(l);
        report.swapped[i] = swapped.accuracy(l);
        report.diff[i] = report.original[i] - report.swapped[i];
    }
    report.verdict = pattern_verdict(report.diff, thresholds);
    return report;
}

DeviationReport deviation(const StressScoreTable& table,
                          bool allow_single_category) {
    // group rows by (model, test), keeping first-appearance order
    std::vector<std::pair<std::string, std::string>> order;
    std::map<std::pair<std::string, std::string>,
             std::vector<const StressScoreRow*>>
        groups;
    for (const auto& row : table.rows) {
        const auto key = std::make_pair(row.model, row.test_name);
        auto& group = groups[key];
        if (group.empty()) order.push_back(key);
        group.push_back(&row);
    }

    DeviationReport report;
    for (const auto& key : order) {
        const auto& group = groups.at(key);
        if (!allow_single_category) {
            bool mat = false, mis = false;
            for (const auto* row : group) {
                (row->category == StressScoreRow::Category::Matched ? mat
                                                                    : mis) =
                    true;
            }
            if (!mat || !mis)
                throw MetricsError("missing category row for (" + key.first +
                                   ", " + key.second + ")");
        }
        DeviationEntry entry;
        entry.model = key.first;
        entry.test_name = key.second;
        for (const auto* row : group) {
            const std::array<std::pair<int, double>, 4> scores = {
                {{25, row->s25}, {50, row->s50}, {75, row->s75},
                 {100, row->s100}}};
            for (const auto& [pct, s] : scores) {
                const double r = s / row->s0;
                entry.ratios.push_back({row->category, pct, r});
                entry.devi += (r - 1.0) * (r - 1.0);
            }
        }
        report.entries.push_back(std::move(entry));
    }
    return report;
}

MisclassProfile confusion_profile(const Corpus& corpus,
                                  const PredictionSet& predictions) {
    check_alignment(corpus, predictions);
    static const std::map<std::pair<Label, Label>, ConfusionType> buckets = {
        {{Label::Entailment, Label::Neutral}, ConfusionType::EtoN},
        {{Label::Entailment, Label::Contradiction}, ConfusionType::EtoC},
        {{Label::Neutral, Label::Entailment}, ConfusionType::NtoE},
        {{Label::Neutral, Label::Contradiction}, ConfusionType::NtoC},
        {{Label::Contradiction, Label::Entailment}, ConfusionType::CtoE},
        {{Label::Contradiction, Label::Neutral}, ConfusionType::CtoN}};
    MisclassProfile profile;
    for (const auto& pair : corpus.pairs) {
        const auto pred = predictions.entries.at(pair.id);
        if (pred == pair.gold) continue;
        ++profile.total_misclassified;
        ++profile.counts[static_cast<int>(buckets.at({pair.gold, pred}))];
    }
    if (profile.total_misclassified > 0) {
        std::array<double, 6> fractions;
        for (std::size_t i = 0; i < 6; ++i)
            fractions[i] = static_cast<double>(profile.counts[i]) /
                           static_cast<double>(profile.total_misclassified);
        profile.fractions = fractions;
    }
    return profile;
}

FrequentErrorSet frequent_errors(const Corpus& corpus, const PredictionLog& log,
                                 std::size_t k) {
    if (log.epochs.empty())
        throw MetricsError("prediction log has no epochs");
    std::map<std::string, std::size_t> counts;
    for (const auto& epoch : log.epochs) {
        check_alignment(corpus, epoch);
        for (const auto& pair : corpus.pairs)
            if (epoch.entries.at(pair.id) != pair.gold) ++counts[pair.id];
    }
    std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                            counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (ranked.size() > k) ranked.resize(k);
    return FrequentErrorSet{std::move(ranked)};
}

std::size_t overlap(const FrequentErrorSet& a, const FrequentErrorSet& b) {
    const auto ids_a = a.ids();
    std::size_t n = 0;
    for (const auto& [id, count] : b.ranked) n += ids_a.count(id);
    return n;
}

std::vector<SwapFixtureRow> read_swap_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open file: " + path);
    std::string line;
    if (!std::getline(in, line))
        throw CorpusError("empty fixture file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "model,label,split,original,swapped")
        throw CorpusError(
            "fixture header must be model,label,split,original,swapped");
    std::vector<SwapFixtureRow> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string f[5];
        for (auto& field : f)
            if (!std::getline(ss, field, ','))
                throw CorpusError("line " + std::to_string(lineno) +
                                  ": expected 5 columns");
        SwapFixtureRow row;
        row.model = f[0];
        const auto label = parse_label(f[1]);
        if (!label)
            throw CorpusError("line " + std::to_string(lineno) +
                              ": fixture label may not be the skip token");
        row.label = *label;
        row.split = f[2];
        row.original = std::stod(f[3]);
        row.swapped = std::stod(f[4]);
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

json eval_report_body(const EvalReport& r) {
    json per_label = json::object();
    for (const auto l : kAllLabels) {
        const auto i = label_index(l);
        per_label[label_name(l)] = {{"correct", r.correct[i]},
                                    {"total", r.total[i]},
                                    {"accuracy", r.accuracy(l)}};
    }
    return {{"per_label", per_label}, {"overall", r.overall()}};
}

const char* verdict_name(Verdict v) {
    return v == Verdict::Consistent ? "consistent" : "suspect";
}

const char* category_name(StressScoreRow::Category c) {
    return c == StressScoreRow::Category::Matched ? "matched" : "mismatched";
}

json swap_diff_body(const SwapDiffReport& r) {
    json per_label = json::object();
    for (const auto l : kAllLabels) {
        const auto i = label_index(l);
        per_label[label_name(l)] = {{"original", r.original[i]},
                                    {"swapped", r.swapped[i]},
                                    {"diff", r.diff[i]}};
    }
    return {{"per_label", per_label},
            {"verdict",
             {{"entailment_drop_ok", r.verdict.entailment_drop_ok},
              {"contradiction_comparable", r.verdict.contradiction_comparable},
              {"neutral_comparable", r.verdict.neutral_comparable},
              {"overall", verdict_name(r.verdict.overall)}}}};
}

}  // namespace

std::string eval_report_json(const EvalReport& r) {
    json j = eval_report_body(r);
    j["version"] = 1;
    return j.dump(2);
}

std::string swap_diff_json(const SwapDiffReport& r) {
    json j = swap_diff_body(r);
    j["version"] = 1;
    return j.dump(2);
}

std::string deviation_json(const DeviationReport& r) {
    json entries = json::array();
    for (const auto& e : r.entries) {
        json ratios = json::array();
        for (const auto& ratio : e.ratios)
            ratios.push_back({{"category", category_name(ratio.category)},
                              {"fraction_percent", ratio.fraction_percent},
                              {"ratio", ratio.ratio}});
        entries.push_back({{"model", e.model},
                           {"test", e.test_name},
                           {"ratios", ratios},
                           {"devi", e.devi}});
    }
    json j;
    j["version"] = 1;
    j["entries"] = entries;
    return j.dump(2);
}

namespace {

std::string fixed(double v, int precision = 3) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(precision);
    ss << v;
    return ss.str();
}

}  // namespace

std::string swap_diff_text(const SwapDiffReport& r) {
    std::ostringstream out;
    out << "label          original  swapped   diff\n";
    static const std::array<const char*, 3> names = {"entailment   ",
                                                     "contradiction",
                                                     "neutral      "};
    for (const auto l : kAllLabels) {
        const auto i = label_index(l);
        out << names[i] << "  " << fixed(r.original[i]) << "     "
            << fixed(r.swapped[i]) << "    " << fixed(r.diff[i]) << "\n";
    }
    out << "verdict: " << verdict_name(r.verdict.overall)
        << " (entailment_drop_ok=" << (r.verdict.entailment_drop_ok ? "y" : "n")
        << ", contradiction_comparable="
        << (r.verdict.contradiction_comparable ? "y" : "n")
        << ", neutral_comparable=" << (r.verdict.neutral_comparable ? "y" : "n")
        << ")\n";
    return out.str();
}

std::string deviation_text(const DeviationReport& r) {
    std::ostringstream out;
    out << "model        test                devi\n";
    for (const auto& e : r.entries) {
        std::string model = e.model, test = e.test_name;
        model.resize(std::max<std::size_t>(model.size(), 11), ' ');
        test.resize(std::max<std::size_t>(test.size(), 18), ' ');
        out << model << "  " << test << "  " << fixed(e.devi, 6) << "\n";
    }
    return out.str();
}

}  // namespace nliswap
