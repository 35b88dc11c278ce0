#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "segan/csv.hpp"
#include "segan/errors.hpp"
#include "segan/matrix.hpp"
#include "segan/rng.hpp"

namespace segan {

enum class ColumnKind { Numeric, Categorical };

struct ColumnSpec {
    std::string name;
    ColumnKind kind = ColumnKind::Numeric;
    double min = 0.0;  // numeric columns
    double max = 0.0;
    std::vector<std::string> categories;  // categorical columns, index = one-hot slot

    std::size_t width() const { return kind == ColumnKind::Numeric ? 1 : categories.size(); }
};

// Per-column encoding recipe plus the label dictionary, derived at load time.
struct ColumnSchema {
    std::vector<ColumnSpec> columns;
    std::string label_column;               // empty when no label column was named
    std::size_t label_index = 0;            // position of the label column in the source table
    bool label_numeric = false;             // true when every observed label parses as a number
    std::vector<std::string> label_classes; // class dictionary (classification view)

    std::size_t feature_dim() const {
        std::size_t d = 0;
        for (const auto& c : columns) d += c.width();
        return d;
    }
    std::size_t class_count() const { return label_classes.size(); }
};

// Per-sample class label; nullopt = absent.
using LabelVector = std::vector<std::optional<std::size_t>>;

// Encoded dataset: values is d x n in normalized space, mask marks observed
// entries, labels (when present) align with sample columns.
struct Dataset {
    Matrix values;  // d x n
    Matrix mask;    // d x n over {0,1}
    LabelVector labels;
    std::vector<double> numeric_targets;  // label column as numbers (regression view); NaN = absent
    ColumnSchema schema;

    std::size_t feature_dim() const { return values.rows(); }
    std::size_t sample_count() const { return values.cols(); }
};

inline std::uint64_t schema_fingerprint(const ColumnSchema& schema) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&h](const std::string& s) {
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
        h ^= 0xff;
        h *= 0x100000001b3ULL;
    };
    for (const auto& col : schema.columns) {
        feed(col.name);
        feed(col.kind == ColumnKind::Numeric ? "num" : "cat");
        if (col.kind == ColumnKind::Numeric) {
            feed(format_number(col.min));
            feed(format_number(col.max));
        } else {
            for (const auto& c : col.categories) feed(c);
        }
    }
    feed(schema.label_column);
    for (const auto& c : schema.label_classes) feed(c);
    return h;
}

namespace detail {

inline ColumnSpec infer_column(const RawTable& table, std::size_t col) {
    ColumnSpec spec;
    spec.name = table.column_names[col];
    bool any = false;
    bool numeric = true;
    for (const auto& row : table.rows) {
        if (!row[col]) continue;
        if (!parse_number(*row[col])) {
            numeric = false;
            break;
        }
        any = true;
    }
    if (numeric && any) {
        spec.kind = ColumnKind::Numeric;
        bool first = true;
        for (const auto& row : table.rows) {
            if (!row[col]) continue;
            const double v = *parse_number(*row[col]);
            if (!std::isfinite(v)) throw ParseError("column '" + spec.name + "' holds a non-finite value");
            if (first) {
                spec.min = spec.max = v;
                first = false;
            } else {
                spec.min = std::min(spec.min, v);
                spec.max = std::max(spec.max, v);
            }
        }
    } else {
        spec.kind = ColumnKind::Categorical;
        std::map<std::string, bool> seen;
        for (const auto& row : table.rows) {
            if (!row[col]) continue;
            if (!seen.count(*row[col])) {
                seen[*row[col]] = true;
                spec.categories.push_back(*row[col]);
            }
        }
        std::sort(spec.categories.begin(), spec.categories.end());
    }
    return spec;
}

}  // namespace detail

// Reads a CSV and derives the encoding schema. The label column, when named,
// is split out of the feature set; its distinct values become the classes.
inline std::pair<RawTable, ColumnSchema> load_csv(const std::string& path, const std::string& label_column = "") {
    RawTable table = load_raw_csv(path);
    ColumnSchema schema;
    schema.label_column = label_column;
    bool label_found = label_column.empty();
    for (std::size_t c = 0; c < table.column_count(); ++c) {
        if (!label_column.empty() && table.column_names[c] == label_column) {
            schema.label_index = c;
            label_found = true;
            continue;
        }
        schema.columns.push_back(detail::infer_column(table, c));
    }
    if (!label_found) {
        throw ConfigError("label column '" + label_column + "' not found in '" + path + "'");
    }
    if (!label_column.empty()) {
        bool numeric = true;
        std::map<std::string, bool> seen;
        for (const auto& row : table.rows) {
            const auto& cell = row[schema.label_index];
            if (!cell) continue;
            if (!parse_number(*cell)) numeric = false;
            if (!seen.count(*cell)) {
                seen[*cell] = true;
                schema.label_classes.push_back(*cell);
            }
        }
        schema.label_numeric = numeric && !schema.label_classes.empty();
        std::sort(schema.label_classes.begin(), schema.label_classes.end());
    }
    return {std::move(table), std::move(schema)};
}

// Min-max normalizes numeric columns and one-hot expands categorical ones.
// A missing source cell blanks the whole expanded block. Constant numeric
// columns map to zero so that decode can still restore the constant.
inline Dataset encode(const RawTable& table, const ColumnSchema& schema) {
    Dataset ds;
    ds.schema = schema;
    const std::size_t d = schema.feature_dim();
    const std::size_t n = table.row_count();
    ds.values = Matrix(d, n);
    ds.mask = Matrix(d, n);
    std::size_t row_offset = 0;
    std::size_t src_col = 0;
    for (const auto& col : schema.columns) {
        while (!schema.label_column.empty() && src_col == schema.label_index) ++src_col;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& cell = table.rows[i][src_col];
            if (!cell) continue;  // whole block stays missing
            if (col.kind == ColumnKind::Numeric) {
                const auto v = parse_number(*cell);
                if (!v) throw SchemaError("column '" + col.name + "': non-numeric value '" + *cell + "'");
                const double range = col.max - col.min;
                ds.values.at(row_offset, i) = range > 0.0 ? (*v - col.min) / range : 0.0;
                ds.mask.at(row_offset, i) = 1.0;
            } else {
                const auto it = std::lower_bound(col.categories.begin(), col.categories.end(), *cell);
                if (it == col.categories.end() || *it != *cell) {
                    throw SchemaError("column '" + col.name + "': unseen category '" + *cell + "'");
                }
                const std::size_t slot = static_cast<std::size_t>(it - col.categories.begin());
                for (std::size_t k = 0; k < col.categories.size(); ++k) {
                    ds.values.at(row_offset + k, i) = (k == slot) ? 1.0 : 0.0;
                    ds.mask.at(row_offset + k, i) = 1.0;
                }
            }
        }
        row_offset += col.width();
        ++src_col;
    }
    if (!schema.label_column.empty()) {
        ds.labels.assign(n, std::nullopt);
        ds.numeric_targets.assign(n, std::numeric_limits<double>::quiet_NaN());
        for (std::size_t i = 0; i < n; ++i) {
            const auto& cell = table.rows[i][schema.label_index];
            if (!cell) continue;
            const auto it = std::lower_bound(schema.label_classes.begin(), schema.label_classes.end(), *cell);
            ds.labels[i] = static_cast<std::size_t>(it - schema.label_classes.begin());
            if (schema.label_numeric) ds.numeric_targets[i] = *parse_number(*cell);
        }
    }
    return ds;
}

// Inverse of encode: numeric inverse transform, one-hot blocks to their
// argmax category, label column restored in its original position.
inline RawTable decode(const Matrix& values, const ColumnSchema& schema, const LabelVector& labels = {}) {
    if (values.rows() != schema.feature_dim()) {
        throw ShapeError("decode: matrix has " + std::to_string(values.rows()) + " rows, schema expects " +
                         std::to_string(schema.feature_dim()));
    }
    const std::size_t n = values.cols();
    RawTable table;
    const std::size_t total_cols = schema.columns.size() + (schema.label_column.empty() ? 0 : 1);
    table.column_names.resize(total_cols);
    table.rows.assign(n, std::vector<std::optional<std::string>>(total_cols));
    std::size_t row_offset = 0;
    std::size_t dst_col = 0;
    for (const auto& col : schema.columns) {
        while (!schema.label_column.empty() && dst_col == schema.label_index) {
            table.column_names[dst_col] = schema.label_column;
            ++dst_col;
        }
        table.column_names[dst_col] = col.name;
        for (std::size_t i = 0; i < n; ++i) {
            if (col.kind == ColumnKind::Numeric) {
                const double v = col.min + values.at(row_offset, i) * (col.max - col.min);
                table.rows[i][dst_col] = format_number(v);
            } else {
                std::size_t best = 0;
                for (std::size_t k = 1; k < col.categories.size(); ++k) {
                    if (values.at(row_offset + k, i) > values.at(row_offset + best, i)) best = k;
                }
                table.rows[i][dst_col] = col.categories[best];
            }
        }
        row_offset += col.width();
        ++dst_col;
    }
    if (!schema.label_column.empty()) {
        if (dst_col == schema.label_index) table.column_names[dst_col] = schema.label_column;
        for (std::size_t i = 0; i < n; ++i) {
            if (i < labels.size() && labels[i]) {
                table.rows[i][schema.label_index] = schema.label_classes[*labels[i]];
            }
        }
    }
    return table;
}

// Deletes each observed entry independently with probability `rate`.
// Deleted slots are zeroed so downstream code cannot read them by accident.
inline void inject_mcar(Dataset& ds, double rate, Rng& rng) {
    if (rate <= 0.0 || rate >= 1.0) throw ConfigError("MCAR rate must lie in (0,1)");
    for (std::size_t i = 0; i < ds.mask.size(); ++i) {
        if (ds.mask.values()[i] == 1.0 && rng.bernoulli(rate)) {
            ds.mask.values()[i] = 0.0;
            ds.values.values()[i] = 0.0;
        }
    }
}

struct EntryIndex {
    std::size_t row;
    std::size_t col;
};

// Hides a random `fraction` of observed entries from the training mask and
// returns them as the evaluation holdout. The data values stay in place;
// hiding is done through the mask alone.
inline std::pair<Matrix, std::vector<EntryIndex>> holdout_known(const Matrix& mask, double fraction, Rng& rng) {
    if (fraction <= 0.0 || fraction >= 1.0) throw ConfigError("holdout fraction must lie in (0,1)");
    std::vector<EntryIndex> observed;
    for (std::size_t r = 0; r < mask.rows(); ++r) {
        for (std::size_t c = 0; c < mask.cols(); ++c) {
            if (mask.at(r, c) == 1.0) observed.push_back({r, c});
        }
    }
    if (observed.empty()) throw DatasetError("holdout_known: dataset has no observed entries");
    rng.shuffle(observed);
    const std::size_t count = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(observed.size())));
    std::vector<EntryIndex> holdout(observed.begin(), observed.begin() + static_cast<std::ptrdiff_t>(count));
    Matrix train_mask = mask;
    for (const auto& e : holdout) train_mask.at(e.row, e.col) = 0.0;
    return {std::move(train_mask), std::move(holdout)};
}

// Removes a random (1 - label_rate) fraction of labels.
inline void mask_labels(LabelVector& labels, double label_rate, Rng& rng) {
    if (label_rate <= 0.0 || label_rate > 1.0) throw ConfigError("label rate must lie in (0,1]");
    if (label_rate == 1.0) return;
    std::vector<std::size_t> present;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i]) present.push_back(i);
    }
    rng.shuffle(present);
    const std::size_t remove =
        static_cast<std::size_t>(std::llround((1.0 - label_rate) * static_cast<double>(present.size())));
    for (std::size_t k = 0; k < remove; ++k) labels[present[k]] = std::nullopt;
}

}  // namespace segan
