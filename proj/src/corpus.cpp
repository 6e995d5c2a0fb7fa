#include "nliswap/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace nliswap {

using nlohmann::json;

std::optional<Label> parse_label(const std::string& s) {
    if (s == "entailment") return Label::Entailment;
    if (s == "contradiction") return Label::Contradiction;
    if (s == "neutral") return Label::Neutral;
    if (s == "-") return std::nullopt;  // SNLI no-consensus marker
    throw CorpusError("unknown label: \"" + s + "\"");
}

const std::string& label_name(Label l) {
    static const std::array<std::string, 3> names = {"entailment",
                                                     "contradiction", "neutral"};
    return names[label_index(l)];
}

namespace {

bool is_unicode_space(char32_t cp) {
    switch (cp) {
        case U' ': case U'\t': case U'\n': case U'\v': case U'\f': case U'\r':
        case 0x0085: case 0x00A0: case 0x1680: case 0x2028: case 0x2029:
        case 0x202F: case 0x205F: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200A;
    }
}

// decodes one UTF-8 codepoint at i; malformed bytes are passed through
// as-is so tokenization never throws
char32_t decode_utf8(const std::string& s, std::size_t& i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    std::size_t len = 1;
    char32_t cp = b0;
    if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; }
    else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; }
    else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; }
    if (len == 1 || i + len > s.size()) { ++i; return b0; }
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) { ++i; return b0; }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += len;
    return cp;
}

bool is_ascii_punct(char c) {
    const auto u = static_cast<unsigned char>(c);
    return u < 0x80 && std::ispunct(u);
}

void push_token(std::vector<std::string>& out, std::string& tok) {
    std::size_t b = 0, e = tok.size();
    while (b < e && is_ascii_punct(tok[b])) ++b;
    while (e > b && is_ascii_punct(tok[e - 1])) --e;
    if (e > b) out.push_back(tok.substr(b, e - b));
    tok.clear();
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string tok;
    std::size_t i = 0;
    while (i < text.size()) {
        const std::size_t start = i;
        const char32_t cp = decode_utf8(text, i);
        if (is_unicode_space(cp)) {
            push_token(out, tok);
        } else if (cp < 0x80) {
            tok.push_back(static_cast<char>(
                std::tolower(static_cast<unsigned char>(text[start]))));
        } else {
            tok.append(text, start, i - start);
        }
    }
    push_token(out, tok);
    return out;
}

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t pos = 0;
    for (;;) {
        const auto tab = line.find('\t', pos);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(pos));
            return fields;
        }
        fields.push_back(line.substr(pos, tab - pos));
        pos = tab + 1;
    }
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open file: " + path);
    return in;
}

void check_pair(const NliPair& pair, std::size_t lineno) {
    if (tokenize(pair.premise).empty())
        throw CorpusError("line " + std::to_string(lineno) +
                          ": premise has no tokens");
    if (tokenize(pair.hypothesis).empty())
        throw CorpusError("line " + std::to_string(lineno) +
                          ": hypothesis has no tokens");
}

}  // namespace

LoadedCorpus read_corpus(const std::string& path, CorpusFormat format) {
    auto in = open_input(path);
    LoadedCorpus result;
    result.corpus.source_path = path;
    std::unordered_set<std::string> seen_ids;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        NliPair pair;
        std::optional<Label> gold;
        try {
            if (format == CorpusFormat::SnliJsonl) {
                const json rec = json::parse(line);
                gold = parse_label(rec.at("gold_label").get<std::string>());
                pair.premise = rec.at("sentence1").get<std::string>();
                pair.hypothesis = rec.at("sentence2").get<std::string>();
                pair.id = rec.contains("pairID")
                              ? rec["pairID"].get<std::string>()
                              : "line-" + std::to_string(lineno);
                if (rec.contains("genre"))
                    pair.genre = rec["genre"].get<std::string>();
            } else {
                const auto f = split_tabs(line);
                if (f.size() < 4)
                    throw CorpusError("expected >= 4 tab-separated fields");
                pair.id = f[0];
                gold = parse_label(f[1]);
                pair.premise = f[2];
                pair.hypothesis = f[3];
                if (f.size() > 4 && !f[4].empty()) pair.genre = f[4];
            }
        } catch (const json::exception& e) {
            throw CorpusError("line " + std::to_string(lineno) +
                              ": malformed record (" + e.what() + ")");
        } catch (const CorpusError& e) {
            throw CorpusError("line " + std::to_string(lineno) + ": " +
                              e.what());
        }
        if (!gold) {
            ++result.skipped;
            continue;
        }
        pair.gold = *gold;
        check_pair(pair, lineno);
        if (!seen_ids.insert(pair.id).second)
            throw CorpusError("line " + std::to_string(lineno) +
                              ": duplicate pair id \"" + pair.id + "\"");
        result.corpus.pairs.push_back(std::move(pair));
    }
    if (result.corpus.pairs.empty())
        throw CorpusError("zero usable pairs in " + path);
    return result;
}

void write_corpus(const Corpus& corpus, const std::string& path,
                  CorpusFormat format) {
    if (corpus.pairs.empty())
        throw CorpusError("refusing to write an empty corpus");
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot open file for writing: " + path);
    for (const auto& pair : corpus.pairs) {
        if (format == CorpusFormat::SnliJsonl) {
            json rec;
            rec["pairID"] = pair.id;
            rec["gold_label"] = label_name(pair.gold);
            rec["sentence1"] = pair.premise;
            rec["sentence2"] = pair.hypothesis;
            if (pair.genre) rec["genre"] = *pair.genre;
            out << rec.dump() << '\n';
        } else {
            out << pair.id << '\t' << label_name(pair.gold) << '\t'
                << pair.premise << '\t' << pair.hypothesis;
            if (pair.genre) out << '\t' << *pair.genre;
            out << '\n';
        }
    }
    if (!out) throw CorpusError("write failed: " + path);
}

PredictionSet read_predictions(const std::string& path,
                               PredictionFormat format) {
    auto in = open_input(path);
    PredictionSet preds;
    const auto slash = path.find_last_of("/\\");
    const auto base = slash == std::string::npos ? path : path.substr(slash + 1);
    preds.model_name = base.substr(0, base.find('.'));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::string id, label_str;
        if (format == PredictionFormat::Tsv) {
            const auto f = split_tabs(line);
            if (f.size() != 2)
                throw CorpusError("line " + std::to_string(lineno) +
                                  ": expected 2 tab-separated fields");
            id = f[0];
            label_str = f[1];
        } else {
            try {
                const json rec = json::parse(line);
                id = rec.at("pairID").get<std::string>();
                label_str = rec.at("label").get<std::string>();
            } catch (const json::exception& e) {
                throw CorpusError("line " + std::to_string(lineno) +
                                  ": malformed record (" + e.what() + ")");
            }
        }
        std::optional<Label> label;
        try {
            label = parse_label(label_str);
        } catch (const CorpusError& e) {
            throw CorpusError("line " + std::to_string(lineno) + ": " +
                              e.what());
        }
        if (!label)
            throw CorpusError("line " + std::to_string(lineno) +
                              ": prediction may not use the skip token");
        if (!preds.entries.emplace(id, *label).second)
            throw CorpusError("duplicate prediction id \"" + id + "\"");
    }
    return preds;
}

void write_predictions(const PredictionSet& preds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw CorpusError("cannot open file for writing: " + path);
    std::vector<std::pair<std::string, Label>> sorted(preds.entries.begin(),
                                                      preds.entries.end());
    std::sort(sorted.begin(), sorted.end());
    for (const auto& [id, label] : sorted)
        out << id << '\t' << label_name(label) << '\n';
    if (!out) throw CorpusError("write failed: " + path);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) {
        return static_cast<char>(std::tolower(c));
    });
    return s;
}

double parse_score(const std::string& s, const char* column,
                   std::size_t lineno) {
    try {
        std::size_t consumed = 0;
        const double v = std::stod(s, &consumed);
        if (consumed != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw CorpusError("line " + std::to_string(lineno) +
                          ": non-numeric score in column " +
                          std::string(column) + ": \"" + s + "\"");
    }
}

}  // namespace

StressScoreTable read_score_table(const std::string& path) {
    auto in = open_input(path);
    std::string line;
    if (!std::getline(in, line))
        throw CorpusError("empty score table: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "model,test,category,s0,s25,s50,s75,s100")
        throw CorpusError(
            "score table header must be exactly "
            "model,test,category,s0,s25,s50,s75,s100");
    static const std::array<const char*, 5> score_cols = {"s0", "s25", "s50",
                                                          "s75", "s100"};
    StressScoreTable table;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv(line);
        if (f.size() != 8)
            throw CorpusError("line " + std::to_string(lineno) +
                              ": expected 8 columns, got " +
                              std::to_string(f.size()));
        StressScoreRow row;
        row.model = f[0];
        row.test_name = f[1];
        const auto cat = lower(f[2]);
        if (cat == "matched")
            row.category = StressScoreRow::Category::Matched;
        else if (cat == "mismatched")
            row.category = StressScoreRow::Category::Mismatched;
        else
            throw CorpusError("line " + std::to_string(lineno) +
                              ": category must be matched or mismatched");
        double* scores[5] = {&row.s0, &row.s25, &row.s50, &row.s75, &row.s100};
        for (std::size_t i = 0; i < 5; ++i) {
            *scores[i] = parse_score(f[3 + i], score_cols[i], lineno);
            if (*scores[i] > 100.0)
                throw CorpusError("line " + std::to_string(lineno) +
                                  ": score above 100 in column " +
                                  score_cols[i]);
        }
        if (row.s0 <= 0.0)
            throw CorpusError("line " + std::to_string(lineno) +
                              ": zero baseline score (s0 must be > 0)");
        for (std::size_t i = 1; i < 5; ++i)
            if (*scores[i] <= 0.0)
                throw CorpusError("line " + std::to_string(lineno) +
                                  ": non-positive score in column " +
                                  score_cols[i]);
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace nliswap
