#include "normpred/embedding.hpp"

#include <cmath>
#include <limits>
#include <set>

#include "normpred/errors.hpp"
#include "normpred/text_io.hpp"

namespace normpred {

std::optional<int> EmbeddingSpace::row_of(const std::string& word) const {
    const std::string key = lowercased ? ascii_lower(word) : word;
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingSpace::rebuild_index() {
    index_.clear();
    index_.reserve(vocab.size());
    for (std::size_t i = 0; i < vocab.size(); ++i) {
        index_.emplace(vocab[i], static_cast<int>(i));
    }
}

EmbeddingSpace parse_vec_file(const std::string& path, long long max_words, bool lowercase,
                              const std::string& lang, VecParseReport* report) {
    LineReader reader(path);
    std::string line;
    if (!reader.next(line)) throw DataError(path + ": missing header line");

    const auto header = split_whitespace(line);
    if (header.size() != 2) throw DataError(path + ": header must be '<count> <dim>'");
    const auto count = parse_double(header[0]);
    const auto dim_d = parse_double(header[1]);
    if (!count || !dim_d || *count < 0 || *dim_d <= 0 || *dim_d != std::floor(*dim_d)) {
        throw DataError(path + ": non-numeric or invalid header '" + line + "'");
    }
    const int dim = static_cast<int>(*dim_d);
    long long expected = static_cast<long long>(*count);
    if (max_words > 0 && max_words < expected) expected = max_words;

    VecParseReport local;
    VecParseReport& rep = report != nullptr ? *report : local;

    EmbeddingSpace space;
    space.lang = lang;
    space.dim = dim;
    space.lowercased = lowercase;
    space.vocab.reserve(expected);
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(expected) * dim);
    std::set<std::string> seen;

    while ((max_words <= 0 || rep.kept < max_words) && reader.next(line)) {
        ++rep.lines_read;
        if (line.empty()) continue;
        const auto tokens = split_whitespace(line);
        if (static_cast<int>(tokens.size()) != dim + 1) {
            ++rep.skipped_malformed;
            continue;
        }
        bool ok = true;
        std::size_t mark = values.size();
        for (int j = 1; j <= dim; ++j) {
            const auto v = parse_double(tokens[j]);
            if (!v) {
                ok = false;
                break;
            }
            values.push_back(*v);
        }
        if (!ok) {
            values.resize(mark);
            ++rep.skipped_malformed;
            continue;
        }
        std::string word(tokens[0]);
        if (lowercase) word = ascii_lower(word);
        if (!seen.insert(word).second) {
            values.resize(mark);
            ++rep.duplicates_dropped;  // first occurrence wins
            continue;
        }
        space.vocab.push_back(std::move(word));
        ++rep.kept;
    }

    if (space.vocab.empty()) throw DataError(path + ": zero parsable embedding rows");

    space.matrix.resize(static_cast<Eigen::Index>(space.vocab.size()), dim);
    for (std::size_t i = 0; i < space.vocab.size(); ++i) {
        for (int j = 0; j < dim; ++j) {
            space.matrix(static_cast<Eigen::Index>(i), j) = values[i * dim + j];
        }
    }
    space.rebuild_index();
    return space;
}

void save_vec_file(const EmbeddingSpace& space, const std::string& path) {
    atomic_write_file(path, [&](std::ostream& out) {
        out << space.size() << ' ' << space.dim << '\n';
        for (int i = 0; i < space.size(); ++i) {
            out << space.vocab[i];
            for (int j = 0; j < space.dim; ++j) {
                out << ' ' << format_double(space.matrix(i, j));
            }
            out << '\n';
        }
    });
}

Standardizer fit_standardizer(const Eigen::MatrixXd& matrix) {
    if (matrix.rows() == 0) throw DataError("cannot fit standardizer on an empty space");
    Standardizer s;
    const double n = static_cast<double>(matrix.rows());
    s.means = matrix.colwise().sum() / n;
    Eigen::MatrixXd centered = matrix.rowwise() - s.means.transpose();
    // population formula (divide by N)
    s.stds = (centered.array().square().colwise().sum() / n).sqrt();
    for (Eigen::Index j = 0; j < s.stds.size(); ++j) {
        if (s.stds[j] == 0.0) s.stds[j] = 1.0;  // constant-column guard
    }
    return s;
}

Standardizer fit_standardizer(const EmbeddingSpace& space) {
    return fit_standardizer(space.matrix);
}

Eigen::MatrixXd standardize_matrix(const Eigen::MatrixXd& matrix, const Standardizer& s) {
    if (matrix.cols() != s.means.size()) {
        throw DataError("standardize: dimensionality mismatch (matrix dim " +
                        std::to_string(matrix.cols()) + ", standardizer dim " +
                        std::to_string(s.means.size()) + ")");
    }
    Eigen::MatrixXd out = matrix.rowwise() - s.means.transpose();
    out.array().rowwise() /= s.stds.transpose().array();
    return out;
}

EmbeddingSpace standardize(const EmbeddingSpace& space, const Standardizer& s) {
    EmbeddingSpace out = space;
    out.matrix = standardize_matrix(space.matrix, s);
    out.rebuild_index();
    return out;
}

const Eigen::VectorXd& IntersectResult::targets(Variable v) const {
    switch (v) {
        case Variable::conc_mean: return conc_mean;
        case Variable::conc_std: return conc_std;
        case Variable::imag_mean: return imag_mean;
        case Variable::imag_std: return imag_std;
    }
    return conc_mean;
}

IntersectResult intersect(const EmbeddingSpace& space, const NormLexicon& lexicon) {
    IntersectResult res;
    std::vector<int> rows;
    rows.reserve(lexicon.entries.size());
    for (const NormEntry& e : lexicon.entries) {
        const auto row = space.row_of(e.word);
        if (!row) {
            ++res.dropped;
            continue;
        }
        rows.push_back(*row);
        res.words.push_back(e.word);
    }
    if (rows.empty()) {
        throw DataError("empty intersection between lexicon and embedding vocabulary");
    }

    const int n = static_cast<int>(rows.size());
    res.features.resize(n, space.dim);
    res.conc_mean.resize(n);
    res.conc_std.resize(n);
    res.imag_mean.resize(n);
    res.imag_std.resize(n);
    int i = 0;
    for (const NormEntry& e : lexicon.entries) {
        if (!space.row_of(e.word)) continue;
        res.features.row(i) = space.matrix.row(rows[i]);
        res.conc_mean[i] = e.conc_mean;
        res.conc_std[i] = e.conc_std;
        res.imag_mean[i] = e.imag_mean;
        res.imag_std[i] = e.imag_std;
        ++i;
    }
    return res;
}

}  // namespace normpred
