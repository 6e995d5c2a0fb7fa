#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "nliswap/metrics.hpp"
#include "test_util.hpp"

using namespace nliswap;
using namespace nliswap::testutil;

namespace {

const std::string kFixtureDir = NLISWAP_FIXTURE_DIR;

Corpus corpus_of(const std::vector<Label>& golds) {
    Corpus c;
    for (std::size_t i = 0; i < golds.size(); ++i)
        c.pairs.push_back({"m" + std::to_string(i), "p", "h", golds[i],
                           std::nullopt});
    return c;
}

PredictionSet predictions_of(const Corpus& corpus,
                             const std::vector<Label>& predicted) {
    PredictionSet preds;
    for (std::size_t i = 0; i < predicted.size(); ++i)
        preds.entries[corpus.pairs[i].id] = predicted[i];
    return preds;
}

EvalReport report_from_accuracies(const std::array<double, 3>& acc,
                                  std::size_t per_label = 1000) {
    EvalReport r;
    for (std::size_t i = 0; i < 3; ++i) {
        r.total[i] = per_label;
        r.correct[i] = static_cast<std::size_t>(
            std::llround(acc[i] * static_cast<double>(per_label)));
    }
    return r;
}

}  // namespace

TEST_CASE("evaluate counts exactly and checks alignment") {
    const auto corpus = corpus_of({Label::Entailment, Label::Entailment,
                                   Label::Contradiction, Label::Neutral});
    SUBCASE("counts") {
        const auto preds = predictions_of(
            corpus, {Label::Entailment, Label::Neutral, Label::Contradiction,
                     Label::Neutral});
        const auto r = evaluate(corpus, preds);
        CHECK(r.correct[label_index(Label::Entailment)] == 1);
        CHECK(r.total[label_index(Label::Entailment)] == 2);
        CHECK(r.accuracy(Label::Contradiction) == 1.0);
        CHECK(r.accuracy(Label::Neutral) == 1.0);
        CHECK(r.overall() == doctest::Approx(0.75));
    }
    SUBCASE("a missing prediction names the offender") {
        auto preds = predictions_of(corpus, {Label::Entailment,
                                             Label::Entailment,
                                             Label::Contradiction,
                                             Label::Neutral});
        preds.entries.erase("m2");
        CHECK_THROWS_WITH_AS(evaluate(corpus, preds), doctest::Contains("m2"),
                             std::runtime_error);
    }
    SUBCASE("an extra prediction names the offender") {
        auto preds = predictions_of(corpus, {Label::Entailment,
                                             Label::Entailment,
                                             Label::Contradiction,
                                             Label::Neutral});
        preds.entries["ghost"] = Label::Neutral;
        CHECK_THROWS_WITH_AS(evaluate(corpus, preds),
                             doctest::Contains("ghost"), std::runtime_error);
    }
}

TEST_CASE("swap_diff") {
    SUBCASE("fixture row: big entailment drop, small C/N movement") {
        const auto rows = read_swap_fixture(kFixtureDir + "/swap_eval.csv");
        std::array<double, 3> orig{}, swapped{};
        for (const auto& row : rows) {
            if (row.model != "CBOW" || row.split != "dev") continue;
            orig[label_index(row.label)] = row.original;
            swapped[label_index(row.label)] = row.swapped;
        }
        const auto r = swap_diff(report_from_accuracies(orig),
                                 report_from_accuracies(swapped));
        CHECK(r.diff[label_index(Label::Entailment)] ==
              doctest::Approx(0.743));
        CHECK(r.diff[label_index(Label::Contradiction)] ==
              doctest::Approx(0.123));
        CHECK(r.diff[label_index(Label::Neutral)] == doctest::Approx(0.261));
        CHECK(r.verdict.entailment_drop_ok);
        CHECK(!r.verdict.contradiction_comparable);
        CHECK(r.verdict.overall == Verdict::Suspect);
    }
    SUBCASE("identical reports give zero diffs and no entailment drop") {
        const auto r0 = report_from_accuracies({0.8, 0.7, 0.6});
        const auto r = swap_diff(r0, r0);
        for (const double d : r.diff) CHECK(d == 0.0);
        CHECK(!r.verdict.entailment_drop_ok);
        CHECK(r.verdict.contradiction_comparable);
        CHECK(r.verdict.neutral_comparable);
        CHECK(r.verdict.overall == Verdict::Suspect);
    }
    SUBCASE("a label with no pairs is an error") {
        auto r0 = report_from_accuracies({0.8, 0.7, 0.6});
        auto empty_n = r0;
        empty_n.total[label_index(Label::Neutral)] = 0;
        CHECK_THROWS_AS(swap_diff(empty_n, r0), std::runtime_error);
        CHECK_THROWS_AS(swap_diff(r0, empty_n), std::runtime_error);
    }
}

namespace {

StressScoreRow score_row(const std::string& model, const std::string& test,
                         StressScoreRow::Category cat, double s0, double s25,
                         double s50, double s75, double s100) {
    StressScoreRow r;
    r.model = model;
    r.test_name = test;
    r.category = cat;
    r.s0 = s0;
    r.s25 = s25;
    r.s50 = s50;
    r.s75 = s75;
    r.s100 = s100;
    return r;
}

// independent brute-force recomputation of the deviation statistic
double devi_oracle(const std::vector<StressScoreRow>& rows) {
    double sum = 0.0;
    for (const auto& row : rows)
        for (const double s : {row.s25, row.s50, row.s75, row.s100}) {
            const double r = s / row.s0;
            sum += (r - 1.0) * (r - 1.0);
        }
    return sum;
}

}  // namespace

TEST_CASE("deviation statistic") {
    using Cat = StressScoreRow::Category;
    SUBCASE("flat scores have zero deviation") {
        StressScoreTable t;
        t.rows.push_back(score_row("M", "T", Cat::Matched, 40, 40, 40, 40, 40));
        t.rows.push_back(score_row("M", "T", Cat::Mismatched, 55, 55, 55, 55,
                                   55));
        const auto report = deviation(t);
        REQUIRE(report.entries.size() == 1);
        CHECK(report.entries[0].devi == doctest::Approx(0.0));
        CHECK(report.entries[0].ratios.size() == 8);
    }
    SUBCASE("single relaxed ratio 1.1 contributes exactly 0.01") {
        StressScoreTable t;
        t.rows.push_back(score_row("M", "T", Cat::Matched, 10, 11, 10, 10, 10));
        const auto report = deviation(t, /*allow_single_category=*/true);
        REQUIRE(report.entries.size() == 1);
        CHECK(report.entries[0].devi == doctest::Approx(0.01));
        CHECK_THROWS_WITH_AS(deviation(t), doctest::Contains("category"),
                             std::runtime_error);
    }
    SUBCASE("fixture values match the brute-force oracle") {
        const auto table = read_score_table(kFixtureDir + "/stress_scores.csv");
        const auto report = deviation(table);
        REQUIRE(report.entries.size() == 25);
        for (const auto& entry : report.entries) {
            std::vector<StressScoreRow> rows;
            for (const auto& row : table.rows)
                if (row.model == entry.model &&
                    row.test_name == entry.test_name)
                    rows.push_back(row);
            REQUIRE(rows.size() == 2);
            CHECK(entry.devi == doctest::Approx(devi_oracle(rows)).epsilon(1e-9));
        }
        // recomputed InferSent Antonymy value
        const auto it = std::find_if(
            report.entries.begin(), report.entries.end(), [](const auto& e) {
                return e.model == "InferSent" && e.test_name == "Antonymy";
            });
        REQUIRE(it != report.entries.end());
        CHECK(it->devi == doctest::Approx(0.189).epsilon(0.005));
    }
    SUBCASE("rescaling all scores of a group leaves devi unchanged") {
        SplitMix64 rng(3);
        for (int trial = 0; trial < 200; ++trial) {
            StressScoreTable t;
            for (const auto cat : {Cat::Matched, Cat::Mismatched}) {
                auto row = score_row("M", "T", cat, 10 + rng.unit() * 50,
                                     10 + rng.unit() * 50, 10 + rng.unit() * 50,
                                     10 + rng.unit() * 50,
                                     10 + rng.unit() * 50);
                t.rows.push_back(row);
            }
            const double base = deviation(t).entries[0].devi;
            const double c = 0.5 + rng.unit();
            for (auto& row : t.rows) {
                row.s0 *= c;
                row.s25 *= c;
                row.s50 *= c;
                row.s75 *= c;
                row.s100 *= c;
            }
            CHECK(deviation(t).entries[0].devi ==
                  doctest::Approx(base).epsilon(1e-9));
        }
    }
    SUBCASE("entries keep first-appearance order") {
        StressScoreTable t;
        t.rows.push_back(score_row("B", "T2", Cat::Matched, 10, 10, 10, 10, 10));
        t.rows.push_back(score_row("A", "T1", Cat::Matched, 10, 10, 10, 10, 10));
        t.rows.push_back(score_row("B", "T2", Cat::Mismatched, 10, 10, 10, 10,
                                   10));
        t.rows.push_back(score_row("A", "T1", Cat::Mismatched, 10, 10, 10, 10,
                                   10));
        const auto report = deviation(t);
        REQUIRE(report.entries.size() == 2);
        CHECK(report.entries[0].model == "B");
        CHECK(report.entries[1].model == "A");
    }
}

TEST_CASE("confusion profile") {
    SUBCASE("engineered counts reproduce exact fractions") {
        // 400 misclassified pairs: 47 E->N, 13 E->C, 82 N->E, 72 N->C,
        // 13 C->E, 173 C->N, plus 25 correct ones
        const std::array<std::pair<std::pair<Label, Label>, std::size_t>, 6>
            plan = {{{{Label::Entailment, Label::Neutral}, 47},
                     {{Label::Entailment, Label::Contradiction}, 13},
                     {{Label::Neutral, Label::Entailment}, 82},
                     {{Label::Neutral, Label::Contradiction}, 72},
                     {{Label::Contradiction, Label::Entailment}, 13},
                     {{Label::Contradiction, Label::Neutral}, 173}}};
        Corpus corpus;
        PredictionSet preds;
        std::size_t next = 0;
        for (const auto& [golds, n] : plan)
            for (std::size_t i = 0; i < n; ++i) {
                const auto id = "c" + std::to_string(next++);
                corpus.pairs.push_back({id, "p", "h", golds.first,
                                        std::nullopt});
                preds.entries[id] = golds.second;
            }
        for (std::size_t i = 0; i < 25; ++i) {
            const auto id = "ok" + std::to_string(i);
            corpus.pairs.push_back({id, "p", "h", Label::Neutral,
                                    std::nullopt});
            preds.entries[id] = Label::Neutral;
        }
        const auto profile = confusion_profile(corpus, preds);
        CHECK(profile.total_misclassified == 400);
        CHECK(profile.counts[static_cast<int>(ConfusionType::EtoN)] == 47);
        CHECK(profile.counts[static_cast<int>(ConfusionType::CtoN)] == 173);
        REQUIRE(profile.fractions.has_value());
        const auto& f = *profile.fractions;
        CHECK(f[static_cast<int>(ConfusionType::EtoN)] == 47.0 / 400);
        CHECK(f[static_cast<int>(ConfusionType::EtoC)] == 13.0 / 400);
        CHECK(f[static_cast<int>(ConfusionType::NtoE)] == 82.0 / 400);
        CHECK(f[static_cast<int>(ConfusionType::NtoC)] == 72.0 / 400);
        CHECK(f[static_cast<int>(ConfusionType::CtoE)] == 13.0 / 400);
        CHECK(f[static_cast<int>(ConfusionType::CtoN)] == 173.0 / 400);
        double sum = 0.0;
        for (const double x : f) sum += x;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("no misclassifications means no fractions") {
        const auto corpus = corpus_of({Label::Neutral, Label::Entailment});
        const auto preds = predictions_of(corpus,
                                          {Label::Neutral, Label::Entailment});
        const auto profile = confusion_profile(corpus, preds);
        CHECK(profile.total_misclassified == 0);
        CHECK(!profile.fractions.has_value());
    }
    SUBCASE("a single error has fraction one") {
        const auto corpus = corpus_of({Label::Neutral, Label::Entailment});
        const auto preds = predictions_of(
            corpus, {Label::Contradiction, Label::Entailment});
        const auto profile = confusion_profile(corpus, preds);
        CHECK(profile.total_misclassified == 1);
        CHECK((*profile.fractions)[static_cast<int>(ConfusionType::NtoC)] ==
              1.0);
    }
}

namespace {

PredictionSet epoch_with_errors(const Corpus& corpus,
                                const std::set<std::string>& wrong) {
    PredictionSet preds;
    for (const auto& pair : corpus.pairs) {
        if (wrong.count(pair.id)) {
            preds.entries[pair.id] =
                pair.gold == Label::Neutral ? Label::Entailment
                                            : Label::Neutral;
        } else {
            preds.entries[pair.id] = pair.gold;
        }
    }
    return preds;
}

}  // namespace

TEST_CASE("frequent errors") {
    SUBCASE("counts rank desc, ties break by id asc") {
        const auto corpus = corpus_of({Label::Neutral, Label::Entailment,
                                       Label::Contradiction, Label::Neutral});
        PredictionLog log;
        log.epochs.push_back(epoch_with_errors(corpus, {"m0", "m1", "m3"}));
        log.epochs.push_back(epoch_with_errors(corpus, {"m1", "m3"}));
        log.epochs.push_back(epoch_with_errors(corpus, {"m3"}));
        const auto top = frequent_errors(corpus, log, 10);
        REQUIRE(top.ranked.size() == 3);  // m2 was never misclassified
        CHECK(top.ranked[0] == std::pair<std::string, std::size_t>{"m3", 3});
        CHECK(top.ranked[1] == std::pair<std::string, std::size_t>{"m1", 2});
        CHECK(top.ranked[2] == std::pair<std::string, std::size_t>{"m0", 1});
        CHECK(frequent_errors(corpus, log, 2).ranked.size() == 2);

        // tie on count: ids sort ascending
        PredictionLog tie;
        tie.epochs.push_back(epoch_with_errors(corpus, {"m3", "m0"}));
        const auto tied = frequent_errors(corpus, tie, 10);
        CHECK(tied.ranked[0].first == "m0");
        CHECK(tied.ranked[1].first == "m3");
    }
    SUBCASE("empty log is an error") {
        const auto corpus = corpus_of({Label::Neutral});
        CHECK_THROWS_AS(frequent_errors(corpus, PredictionLog{}, 5),
                        std::runtime_error);
    }
    SUBCASE("matches a brute-force oracle on random logs") {
        SplitMix64 rng(17);
        for (int trial = 0; trial < 100; ++trial) {
            const auto corpus = random_corpus(rng, 5 + rng.below(30));
            PredictionLog log;
            const auto epochs = 1 + rng.below(5);
            std::map<std::string, std::size_t> oracle_counts;
            for (std::uint64_t e = 0; e < epochs; ++e) {
                std::set<std::string> wrong;
                for (const auto& pair : corpus.pairs)
                    if (rng.below(3) == 0) wrong.insert(pair.id);
                for (const auto& id : wrong) ++oracle_counts[id];
                log.epochs.push_back(epoch_with_errors(corpus, wrong));
            }
            std::vector<std::pair<std::string, std::size_t>> oracle(
                oracle_counts.begin(), oracle_counts.end());
            std::sort(oracle.begin(), oracle.end(),
                      [](const auto& a, const auto& b) {
                          if (a.second != b.second) return a.second > b.second;
                          return a.first < b.first;
                      });
            const auto k = 1 + rng.below(10);
            if (oracle.size() > k) oracle.resize(k);
            CHECK(frequent_errors(corpus, log, k).ranked == oracle);
        }
    }
}

TEST_CASE("overlap of frequent-error sets") {
    FrequentErrorSet a, b;
    a.ranked = {{"x1", 3}, {"x2", 2}, {"x3", 1}};
    SUBCASE("disjoint sets overlap in zero") {
        b.ranked = {{"y1", 5}};
        CHECK(overlap(a, b) == 0);
    }
    SUBCASE("a set overlaps itself fully") {
        CHECK(overlap(a, a) == a.ranked.size());
    }
    SUBCASE("partial overlap counts shared ids") {
        b.ranked = {{"x3", 9}, {"y1", 4}, {"x1", 1}};
        CHECK(overlap(a, b) == 2);
    }
}

TEST_CASE("swap fixture loads all 36 rows") {
    const auto rows = read_swap_fixture(kFixtureDir + "/swap_eval.csv");
    REQUIRE(rows.size() == 36);
    CHECK(rows[0].model == "CBOW");
    CHECK(rows[0].label == Label::Entailment);
    CHECK(rows[0].split == "dev");
    CHECK(rows[0].original == doctest::Approx(0.877));
    CHECK(rows[0].swapped == doctest::Approx(0.134));
    std::set<std::string> models;
    for (const auto& row : rows) models.insert(row.model);
    CHECK(models == std::set<std::string>{"ADV", "CBOW", "DGA", "ESIM",
                                          "InferSent", "KIM"});
}

TEST_CASE("serializers carry a version field") {
    const auto r = swap_diff(report_from_accuracies({0.9, 0.7, 0.7}),
                             report_from_accuracies({0.3, 0.65, 0.66}));
    CHECK(swap_diff_json(r).find("\"version\"") != std::string::npos);
    CHECK(eval_report_json(report_from_accuracies({0.9, 0.7, 0.7}))
              .find("\"version\"") != std::string::npos);
    CHECK(swap_diff_text(r).find("consistent") != std::string::npos);
}
