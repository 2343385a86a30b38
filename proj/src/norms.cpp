#include "normpred/norms.hpp"

#include <algorithm>
#include <set>

#include "normpred/errors.hpp"
#include "normpred/rng.hpp"
#include "normpred/text_io.hpp"

namespace normpred {

const char* variable_name(Variable v) {
    switch (v) {
        case Variable::conc_mean: return "conc_mean";
        case Variable::conc_std: return "conc_std";
        case Variable::imag_mean: return "imag_mean";
        case Variable::imag_std: return "imag_std";
    }
    return "?";
}

std::optional<Variable> variable_from_name(const std::string& name) {
    if (name == "conc_mean") return Variable::conc_mean;
    if (name == "conc_std") return Variable::conc_std;
    if (name == "imag_mean") return Variable::imag_mean;
    if (name == "imag_std") return Variable::imag_std;
    return std::nullopt;
}

bool is_mean_variable(Variable v) {
    return v == Variable::conc_mean || v == Variable::imag_mean;
}

double NormEntry::get(Variable v) const {
    switch (v) {
        case Variable::conc_mean: return conc_mean;
        case Variable::conc_std: return conc_std;
        case Variable::imag_mean: return imag_mean;
        case Variable::imag_std: return imag_std;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

void NormEntry::set(Variable v, double value) {
    switch (v) {
        case Variable::conc_mean: conc_mean = value; return;
        case Variable::conc_std: conc_std = value; return;
        case Variable::imag_mean: imag_mean = value; return;
        case Variable::imag_std: imag_std = value; return;
    }
}

bool NormEntry::has_any() const {
    return std::isfinite(conc_mean) || std::isfinite(conc_std) || std::isfinite(imag_mean) ||
           std::isfinite(imag_std);
}

const NormEntry* NormLexicon::find(const std::string& word) const {
    const std::string key = lowercased ? ascii_lower(word) : word;
    auto it = index_.find(key);
    if (it == index_.end()) return nullptr;
    return &entries[it->second];
}

void NormLexicon::rebuild_index() {
    index_.clear();
    index_.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) {
        index_.emplace(entries[i].word, static_cast<int>(i));
    }
}

std::string LexiconSchema::column_for(Variable v) const {
    switch (v) {
        case Variable::conc_mean: return conc_mean;
        case Variable::conc_std: return conc_std;
        case Variable::imag_mean: return imag_mean;
        case Variable::imag_std: return imag_std;
    }
    return {};
}

namespace {

constexpr Variable kAllVariables[] = {Variable::conc_mean, Variable::conc_std,
                                      Variable::imag_mean, Variable::imag_std};

bool has_inner_whitespace(const std::string& w) {
    return w.find(' ') != std::string::npos || w.find('\t') != std::string::npos;
}

}  // namespace

NormLexicon load_lexicon(const std::string& path, const LexiconSchema& schema,
                         std::pair<double, double> scale, const std::string& lang,
                         bool lowercase, LexiconLoadReport* report) {
    LineReader reader(path);
    std::string line;
    if (!reader.next(line)) throw DataError("empty lexicon file: " + path);

    const auto header = split_tab(line);
    auto column_index = [&](const std::string& name) -> int {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return static_cast<int>(i);
        }
        return -1;
    };

    const int word_col = column_index(schema.word);
    if (word_col < 0) {
        throw DataError(path + ": word column '" + schema.word + "' not found in header");
    }
    int var_cols[4];
    int n_rating_cols = 0;
    for (int k = 0; k < 4; ++k) {
        const std::string name = schema.column_for(kAllVariables[k]);
        var_cols[k] = name.empty() ? -1 : column_index(name);
        if (!name.empty() && var_cols[k] < 0) {
            throw DataError(path + ": rating column '" + name + "' not found in header");
        }
        if (var_cols[k] >= 0) ++n_rating_cols;
    }
    if (n_rating_cols == 0) throw DataError(path + ": schema names no rating columns");

    NormLexicon lex;
    lex.lang = lang;
    lex.scale_min = scale.first;
    lex.scale_max = scale.second;
    lex.lowercased = lowercase;
    LexiconLoadReport local;
    LexiconLoadReport& rep = report != nullptr ? *report : local;
    std::set<std::string> seen;

    long long row_no = 1;  // header was row 1
    while (reader.next(line)) {
        ++row_no;
        ++rep.rows_read;
        if (line.empty()) continue;
        const auto cells = split_tab(line);

        auto cell = [&](int idx) -> std::string_view {
            return idx >= 0 && idx < static_cast<int>(cells.size()) ? cells[idx]
                                                                    : std::string_view{};
        };

        NormEntry entry;
        entry.word = std::string(cell(word_col));
        if (lowercase) entry.word = ascii_lower(entry.word);
        if (entry.word.empty() || has_inner_whitespace(entry.word)) {
            rep.rejected_rows.push_back("row " + std::to_string(row_no) +
                                        ": empty or whitespace-containing word");
            continue;
        }

        bool out_of_scale = false;
        for (int k = 0; k < 4; ++k) {
            const std::string_view c = cell(var_cols[k]);
            if (var_cols[k] < 0 || c.empty()) continue;
            const auto value = parse_double(c);
            if (!value) {
                throw DataError(path + " row " + std::to_string(row_no) +
                                ": unparsable numeric cell '" + std::string(c) + "'");
            }
            const bool is_std = kAllVariables[k] == Variable::conc_std ||
                                kAllVariables[k] == Variable::imag_std;
            if (is_std) {
                if (*value < 0.0) out_of_scale = true;
            } else if (*value < scale.first || *value > scale.second) {
                out_of_scale = true;
            }
            entry.set(kAllVariables[k], *value);
        }
        if (out_of_scale) {
            rep.rejected_rows.push_back("row " + std::to_string(row_no) + ": word '" + entry.word +
                                        "' has a rating outside the scale");
            continue;
        }
        if (!entry.has_any()) {
            rep.rejected_rows.push_back("row " + std::to_string(row_no) + ": word '" + entry.word +
                                        "' carries no rating");
            continue;
        }
        if (!seen.insert(entry.word).second) {
            ++rep.duplicates_dropped;
            continue;  // first wins
        }
        lex.entries.push_back(std::move(entry));
        ++rep.kept;
    }

    if (lex.entries.empty()) throw DataError(path + ": no usable lexicon rows");
    lex.rebuild_index();
    return lex;
}

void save_lexicon(const NormLexicon& lex, const std::string& path) {
    atomic_write_file(path, [&](std::ostream& out) {
        out << "word\tconc_mean\tconc_std\timag_mean\timag_std\n";
        for (const NormEntry& e : lex.entries) {
            out << e.word;
            for (Variable v : kAllVariables) {
                out << '\t';
                if (e.has(v)) out << format_double(e.get(v));
            }
            out << '\n';
        }
    });
}

NormLexicon downsample(const NormLexicon& lex, int n, std::uint64_t seed) {
    if (n <= 0 || n > lex.size()) {
        throw DataError("downsample: n=" + std::to_string(n) + " out of range (lexicon has " +
                        std::to_string(lex.size()) + " entries)");
    }
    Rng rng(seed);
    std::vector<std::size_t> order = rng.permutation(lex.entries.size());
    order.resize(n);

    NormLexicon out;
    out.lang = lex.lang;
    out.scale_min = lex.scale_min;
    out.scale_max = lex.scale_max;
    out.lowercased = lex.lowercased;
    out.entries.reserve(n);
    for (std::size_t idx : order) out.entries.push_back(lex.entries[idx]);
    out.rebuild_index();
    return out;
}

TransferDictionary load_transfer_dictionary(const std::string& path) {
    LineReader reader(path);
    std::string line;
    TransferDictionary dict;
    std::set<std::pair<std::string, std::string>> seen;
    while (reader.next(line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_tab(line);
        if (cells.size() < 2 || cells[0].empty() || cells[1].empty()) {
            throw DataError(path + ": malformed dictionary line '" + line + "'");
        }
        std::pair<std::string, std::string> pair{std::string(cells[0]), std::string(cells[1])};
        if (seen.insert(pair).second) dict.pairs.push_back(std::move(pair));
    }
    return dict;
}

}  // namespace normpred
