#include "normpred/alignment.hpp"

#include <Eigen/Dense>
#include <set>

#include "normpred/errors.hpp"
#include "normpred/text_io.hpp"

namespace normpred {

BilingualPairs load_pairs(const std::string& path) {
    LineReader reader(path);
    std::string line;
    BilingualPairs out;
    std::set<std::pair<std::string, std::string>> seen;
    while (reader.next(line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_tab(line);
        if (cells.size() < 2 || cells[0].empty() || cells[1].empty()) {
            throw DataError(path + ": malformed pair line '" + line + "'");
        }
        std::pair<std::string, std::string> pair{std::string(cells[0]), std::string(cells[1])};
        if (seen.insert(pair).second) out.pairs.push_back(std::move(pair));
    }
    return out;
}

AlignmentTransform AlignmentTransform::inverse() const {
    AlignmentTransform inv;
    inv.W = W.transpose();  // orthogonal, so the transpose inverts it
    inv.source_lang = target_lang;
    inv.target_lang = source_lang;
    inv.pairs_used = pairs_used;
    return inv;
}

AlignmentTransform learn_procrustes(const EmbeddingSpace& src, const EmbeddingSpace& tgt,
                                    const BilingualPairs& pairs, ProcrustesReport* report) {
    if (src.dim != tgt.dim) {
        throw DataError("learn_procrustes: dimension mismatch (" + std::to_string(src.dim) +
                        " vs " + std::to_string(tgt.dim) + ")");
    }
    ProcrustesReport local;
    ProcrustesReport& rep = report != nullptr ? *report : local;
    rep.pairs_total = pairs.size();

    std::vector<std::pair<int, int>> rows;
    rows.reserve(pairs.pairs.size());
    std::set<std::pair<int, int>> seen;
    for (const auto& [s, t] : pairs.pairs) {
        const auto si = src.row_of(s);
        const auto ti = tgt.row_of(t);
        if (!si || !ti) {
            ++rep.pairs_dropped_missing;
            continue;
        }
        if (src.matrix.row(*si).norm() == 0.0 || tgt.matrix.row(*ti).norm() == 0.0) {
            ++rep.pairs_dropped_missing;
            continue;
        }
        if (seen.insert({*si, *ti}).second) rows.emplace_back(*si, *ti);
    }
    rep.pairs_usable = static_cast<int>(rows.size());
    if (rows.size() < 2) {
        throw DataError("learn_procrustes: fewer than 2 usable pairs (" +
                        std::to_string(rows.size()) + " of " + std::to_string(pairs.size()) + ")");
    }
    rep.underdetermined = static_cast<int>(rows.size()) < src.dim;

    const int n = static_cast<int>(rows.size());
    Eigen::MatrixXd X(n, src.dim), Y(n, src.dim);
    for (int i = 0; i < n; ++i) {
        X.row(i) = src.matrix.row(rows[i].first).normalized();
        Y.row(i) = tgt.matrix.row(rows[i].second).normalized();
    }

    const Eigen::MatrixXd M = X.transpose() * Y;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
    if (svd.info() != Eigen::Success) {
        throw DataError("learn_procrustes: SVD did not converge");
    }

    AlignmentTransform t;
    t.W = svd.matrixU() * svd.matrixV().transpose();
    t.source_lang = src.lang;
    t.target_lang = tgt.lang;
    t.pairs_used = n;
    return t;
}

EmbeddingSpace apply_transform(const EmbeddingSpace& space, const AlignmentTransform& t) {
    if (space.dim != t.dim()) {
        throw DataError("apply_transform: dimension mismatch (space dim " +
                        std::to_string(space.dim) + ", transform dim " + std::to_string(t.dim()) +
                        ")");
    }
    EmbeddingSpace out = space;
    out.matrix = space.matrix * t.W;
    out.rebuild_index();
    return out;
}

void save_transform(const AlignmentTransform& t, const std::string& path) {
    atomic_write_file(path, [&](std::ostream& out) {
        out << t.dim() << ' ' << t.source_lang << ' ' << t.target_lang << '\n';
        for (int i = 0; i < t.dim(); ++i) {
            for (int j = 0; j < t.dim(); ++j) {
                if (j > 0) out << '\t';
                out << format_double(t.W(i, j));
            }
            out << '\n';
        }
    });
}

AlignmentTransform load_transform(const std::string& path) {
    LineReader reader(path);
    std::string line;
    if (!reader.next(line)) throw DataError(path + ": missing transform header");
    const auto header = split_whitespace(line);
    if (header.empty()) throw DataError(path + ": malformed transform header");
    const auto dim_d = parse_double(header[0]);
    if (!dim_d || *dim_d <= 0) throw DataError(path + ": malformed transform header");
    const int dim = static_cast<int>(*dim_d);

    AlignmentTransform t;
    if (header.size() > 1) t.source_lang = std::string(header[1]);
    if (header.size() > 2) t.target_lang = std::string(header[2]);
    t.W.resize(dim, dim);
    for (int i = 0; i < dim; ++i) {
        if (!reader.next(line)) throw DataError(path + ": truncated transform matrix");
        const auto cells = split_whitespace(line);
        if (static_cast<int>(cells.size()) != dim) {
            throw DataError(path + ": row " + std::to_string(i) + " has " +
                            std::to_string(cells.size()) + " values, expected " +
                            std::to_string(dim));
        }
        for (int j = 0; j < dim; ++j) {
            const auto v = parse_double(cells[j]);
            if (!v) throw DataError(path + ": non-numeric matrix cell");
            t.W(i, j) = *v;
        }
    }
    return t;
}

}  // namespace normpred
