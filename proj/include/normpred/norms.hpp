#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace normpred {

// The four response variables the lexicons carry.
enum class Variable { conc_mean, conc_std, imag_mean, imag_std };

const char* variable_name(Variable v);
std::optional<Variable> variable_from_name(const std::string& name);
bool is_mean_variable(Variable v);

// Absent ratings are NaN (e.g. BWK has no imageability, MRC no stds).
struct NormEntry {
    std::string word;
    double conc_mean = std::numeric_limits<double>::quiet_NaN();
    double conc_std = std::numeric_limits<double>::quiet_NaN();
    double imag_mean = std::numeric_limits<double>::quiet_NaN();
    double imag_std = std::numeric_limits<double>::quiet_NaN();

    double get(Variable v) const;
    void set(Variable v, double value);
    bool has(Variable v) const { return std::isfinite(get(v)); }
    bool has_any() const;
};

struct NormLexicon {
    std::string lang;
    double scale_min = 1.0;
    double scale_max = 5.0;
    bool lowercased = true;
    std::vector<NormEntry> entries;

    int size() const { return static_cast<int>(entries.size()); }
    const NormEntry* find(const std::string& word) const;
    void rebuild_index();

  private:
    std::unordered_map<std::string, int> index_;
};

// Maps canonical columns to header names of the file being imported.
// Empty names mean "column not present in this resource".
struct LexiconSchema {
    std::string word = "word";
    std::string conc_mean = "conc_mean";
    std::string conc_std = "conc_std";
    std::string imag_mean = "imag_mean";
    std::string imag_std = "imag_std";

    std::string column_for(Variable v) const;
};

struct LexiconLoadReport {
    long long rows_read = 0;
    long long kept = 0;
    long long duplicates_dropped = 0;
    // Row-numbered rejections (out-of-scale rating, whitespace word,
    // no rating present).
    std::vector<std::string> rejected_rows;
};

// TSV with header. Rows whose ratings fall outside [scale.first,
// scale.second] are rejected with their row number; duplicate words keep the
// first occurrence. Unparsable numeric cells and schema mismatches abort
// the load.
NormLexicon load_lexicon(const std::string& path, const LexiconSchema& schema,
                         std::pair<double, double> scale, const std::string& lang = "",
                         bool lowercase = true, LexiconLoadReport* report = nullptr);

// Canonical TSV: word, conc_mean, conc_std, imag_mean, imag_std with empty
// cells for absent values.
void save_lexicon(const NormLexicon& lex, const std::string& path);

// Uniform sample of n entries without replacement, deterministic under seed.
NormLexicon downsample(const NormLexicon& lex, int n, std::uint64_t seed);

struct TransferDictionary {
    std::vector<std::pair<std::string, std::string>> pairs;  // source -> target

    int size() const { return static_cast<int>(pairs.size()); }
};

// TSV `source<TAB>target`; duplicates on disk are deduplicated, lines
// starting with '#' ignored.
TransferDictionary load_transfer_dictionary(const std::string& path);

}  // namespace normpred
