#include "mlbatch/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace mlbatch {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool starts_with_ci(const std::string& line, const std::string& kw) {
    return lower(line.substr(0, kw.size())) == kw;
}

// Strips optional single or double quotes around an ARFF identifier.
std::string unquote(const std::string& s) {
    if (s.size() >= 2 && ((s.front() == '\'' && s.back() == '\'') ||
                          (s.front() == '"' && s.back() == '"')))
        return s.substr(1, s.size() - 2);
    return s;
}

double parse_double(const std::string& tok, std::size_t line_no) {
    const std::string t = trim(tok);
    double v;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        throw ParseError("cannot parse numeric value '" + t + "'", line_no);
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            break;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

struct ArffAttribute {
    std::string name;
    bool nominal = false;
    std::vector<std::string> nominal_values;
};

struct RawArff {
    std::vector<ArffAttribute> attrs;
    std::vector<std::vector<double>> rows;
};

RawArff parse_arff(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open ARFF file: " + path);

    RawArff arff;
    std::string line;
    std::size_t line_no = 0;
    bool in_data = false;

    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty() || t[0] == '%') continue;

        if (!in_data) {
            if (starts_with_ci(t, "@relation")) continue;
            if (starts_with_ci(t, "@data")) {
                if (arff.attrs.empty())
                    throw ParseError("@data before any @attribute", line_no);
                in_data = true;
                continue;
            }
            if (starts_with_ci(t, "@attribute")) {
                std::string rest = trim(t.substr(std::string("@attribute").size()));
                std::string name;
                std::size_t pos = 0;
                if (!rest.empty() && (rest[0] == '\'' || rest[0] == '"')) {
                    char qc = rest[0];
                    std::size_t end = rest.find(qc, 1);
                    if (end == std::string::npos)
                        throw ParseError("unterminated quoted attribute name", line_no);
                    name = rest.substr(1, end - 1);
                    pos = end + 1;
                } else {
                    std::size_t end = rest.find_first_of(" \t");
                    if (end == std::string::npos)
                        throw ParseError("attribute declaration missing type", line_no);
                    name = rest.substr(0, end);
                    pos = end;
                }
                std::string type = trim(rest.substr(pos));
                ArffAttribute attr;
                attr.name = name;
                if (!type.empty() && type[0] == '{') {
                    if (type.back() != '}')
                        throw ParseError("unterminated nominal value set", line_no);
                    attr.nominal = true;
                    for (auto& v : split(type.substr(1, type.size() - 2), ','))
                        attr.nominal_values.push_back(unquote(trim(v)));
                } else {
                    std::string tl = lower(type);
                    if (tl != "numeric" && tl != "real" && tl != "integer")
                        throw ParseError("unsupported attribute type '" + type + "'", line_no);
                }
                arff.attrs.push_back(std::move(attr));
                continue;
            }
            throw ParseError("unexpected header line '" + t.substr(0, 40) + "'", line_no);
        }

        // data section
        const std::size_t width = arff.attrs.size();
        std::vector<double> row(width, 0.0);
        if (t[0] == '{') {
            // sparse instance: {idx value, idx value, ...}; absent entries are 0
            if (t.back() != '}') throw ParseError("unterminated sparse instance", line_no);
            std::string body = trim(t.substr(1, t.size() - 2));
            if (!body.empty()) {
                for (auto& pair : split(body, ',')) {
                    std::istringstream ps(trim(pair));
                    std::size_t idx;
                    std::string val;
                    if (!(ps >> idx >> val))
                        throw ParseError("malformed sparse entry '" + pair + "'", line_no);
                    if (idx >= width)
                        throw ParseError("sparse index out of range", line_no);
                    row[idx] = parse_double(unquote(val), line_no);
                }
            }
        } else {
            auto toks = split(t, ',');
            if (toks.size() != width)
                throw ParseError("instance has " + std::to_string(toks.size()) +
                                     " values, expected " + std::to_string(width),
                                 line_no);
            for (std::size_t j = 0; j < width; ++j)
                row[j] = parse_double(unquote(trim(toks[j])), line_no);
        }
        arff.rows.push_back(std::move(row));
    }

    if (!in_data) throw ParseError("missing @data section");
    if (arff.rows.empty()) throw ParseError("ARFF file has no instances");
    return arff;
}

Dataset assemble(const RawArff& arff, const std::vector<bool>& is_label) {
    const std::size_t width = arff.attrs.size();
    std::size_t q = 0;
    for (bool b : is_label) q += b;
    const std::size_t d = width - q;
    if (d == 0) throw ValidationError("every attribute is a label; no features left");
    if (q == 0) throw ValidationError("no label attributes identified");

    for (std::size_t j = 0; j < width; ++j) {
        if (!is_label[j]) continue;
        const auto& attr = arff.attrs[j];
        if (attr.nominal) {
            for (const auto& v : attr.nominal_values)
                if (v != "0" && v != "1")
                    throw ValidationError("label attribute '" + attr.name +
                                          "' is nominal over non-binary values");
        }
    }

    Dataset ds;
    ds.features = Matrix(arff.rows.size(), d);
    ds.labels = Matrix(arff.rows.size(), q);
    for (std::size_t j = 0, fj = 0, lj = 0; j < width; ++j) {
        if (is_label[j]) {
            ds.label_names.push_back(arff.attrs[j].name);
            ++lj;
        } else {
            ds.feature_names.push_back(arff.attrs[j].name);
            ++fj;
        }
    }
    for (std::size_t i = 0; i < arff.rows.size(); ++i) {
        std::size_t fj = 0, lj = 0;
        for (std::size_t j = 0; j < width; ++j) {
            double v = arff.rows[i][j];
            if (is_label[j]) {
                if (v != 0.0 && v != 1.0)
                    throw ValidationError("label '" + arff.attrs[j].name +
                                          "' takes non-binary value " + std::to_string(v));
                ds.labels(i, lj++) = v;
            } else {
                ds.features(i, fj++) = v;
            }
        }
    }
    return ds;
}

}  // namespace

std::vector<std::string> read_label_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open label list: " + path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    std::vector<std::string> names;
    if (content.find("<label") != std::string::npos) {
        // MULAN XML: pull name="..." out of each <label .../> element
        std::size_t pos = 0;
        while ((pos = content.find("<label", pos)) != std::string::npos) {
            std::size_t np = content.find("name", pos);
            if (np == std::string::npos) break;
            std::size_t open = content.find('"', np);
            std::size_t close = open == std::string::npos
                                    ? std::string::npos
                                    : content.find('"', open + 1);
            if (close == std::string::npos)
                throw ParseError("malformed <label> element in " + path);
            names.push_back(content.substr(open + 1, close - open - 1));
            pos = close;
        }
    } else {
        std::istringstream iss(content);
        std::string line;
        while (std::getline(iss, line)) {
            std::string t = trim(line);
            if (!t.empty()) names.push_back(t);
        }
    }
    if (names.empty()) throw ParseError("label list is empty: " + path);
    return names;
}

Dataset load_arff(const std::string& arff_path, const std::vector<std::string>& label_names) {
    RawArff arff = parse_arff(arff_path);
    std::vector<bool> is_label(arff.attrs.size(), false);
    for (const auto& name : label_names) {
        bool found = false;
        for (std::size_t j = 0; j < arff.attrs.size(); ++j) {
            if (arff.attrs[j].name == name) {
                if (is_label[j])
                    throw ValidationError("label '" + name + "' listed more than once");
                is_label[j] = true;
                found = true;
                break;
            }
        }
        if (!found)
            throw ValidationError("label attribute '" + name + "' not found in ARFF header");
    }
    return assemble(arff, is_label);
}

Dataset load_arff(const std::string& arff_path, int label_count) {
    RawArff arff = parse_arff(arff_path);
    if (label_count < 1 || static_cast<std::size_t>(label_count) >= arff.attrs.size())
        throw std::invalid_argument("label_count out of range");
    std::vector<bool> is_label(arff.attrs.size(), false);
    for (std::size_t j = arff.attrs.size() - label_count; j < arff.attrs.size(); ++j)
        is_label[j] = true;
    return assemble(arff, is_label);
}

Dataset load_csv(const std::string& csv_path, int label_count) {
    std::ifstream in(csv_path);
    if (!in) throw ParseError("cannot open CSV file: " + csv_path);

    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError("empty CSV file: " + csv_path);
    ++line_no;
    auto header = split(trim(line), ',');
    const std::size_t width = header.size();
    if (label_count < 1 || static_cast<std::size_t>(label_count) >= width)
        throw std::invalid_argument("label_count out of range");

    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        std::string t = trim(line);
        if (t.empty()) continue;
        auto toks = split(t, ',');
        if (toks.size() != width)
            throw ParseError("ragged row: " + std::to_string(toks.size()) +
                                 " values, expected " + std::to_string(width),
                             line_no);
        std::vector<double> row(width);
        for (std::size_t j = 0; j < width; ++j) row[j] = parse_double(toks[j], line_no);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("CSV has a header but no data rows: " + csv_path);

    const std::size_t d = width - label_count;
    Dataset ds;
    ds.features = Matrix(rows.size(), d);
    ds.labels = Matrix(rows.size(), label_count);
    ds.feature_names.assign(header.begin(), header.begin() + d);
    ds.label_names.assign(header.begin() + d, header.end());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) ds.features(i, j) = rows[i][j];
        for (std::size_t j = 0; j < static_cast<std::size_t>(label_count); ++j) {
            double v = rows[i][d + j];
            if (v != 0.0 && v != 1.0)
                throw ValidationError("label column '" + ds.label_names[j] +
                                      "' takes non-binary value " + std::to_string(v));
            ds.labels(i, j) = v;
        }
    }
    return ds;
}

void write_csv(const Dataset& ds, const std::string& csv_path) {
    std::ofstream out(csv_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + csv_path);
    out.precision(17);
    for (std::size_t j = 0; j < ds.d(); ++j) out << (j ? "," : "") << ds.feature_names[j];
    for (std::size_t j = 0; j < ds.q(); ++j) out << "," << ds.label_names[j];
    out << "\n";
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.d(); ++j) out << (j ? "," : "") << ds.features(i, j);
        for (std::size_t j = 0; j < ds.q(); ++j) out << "," << ds.labels(i, j);
        out << "\n";
    }
}

DatasetStats stats(const Dataset& ds) {
    double total = 0.0;
    for (std::size_t i = 0; i < ds.n(); ++i)
        for (std::size_t j = 0; j < ds.q(); ++j) total += ds.labels(i, j);
    DatasetStats s;
    s.card = total / static_cast<double>(ds.n());
    s.dens = s.card / static_cast<double>(ds.q());
    return s;
}

FoldSplit kfold(const Dataset& ds, int fold_count, std::uint64_t seed) {
    const std::size_t n = ds.n();
    if (fold_count < 2) throw std::invalid_argument("fold_count must be >= 2");
    if (static_cast<std::size_t>(fold_count) > n)
        throw std::invalid_argument("fold_count exceeds instance count");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    FoldSplit split;
    split.fold_count = fold_count;
    split.assignments.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        split.assignments[order[i]] = static_cast<int>(i % fold_count);
    return split;
}

void standardize_features(Matrix& features, const std::vector<std::size_t>& fit_rows) {
    if (fit_rows.empty()) throw std::invalid_argument("standardize: empty fit set");
    const std::size_t d = features.cols();
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (std::size_t i : fit_rows)
        for (std::size_t j = 0; j < d; ++j) mean[j] += features(i, j);
    for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(fit_rows.size());
    for (std::size_t i : fit_rows)
        for (std::size_t j = 0; j < d; ++j) {
            double c = features(i, j) - mean[j];
            var[j] += c * c;
        }
    for (std::size_t j = 0; j < d; ++j) var[j] /= static_cast<double>(fit_rows.size());
    for (std::size_t i = 0; i < features.rows(); ++i)
        for (std::size_t j = 0; j < d; ++j) {
            double c = features(i, j) - mean[j];
            features(i, j) = var[j] > 0.0 ? c / std::sqrt(var[j]) : c;
        }
}

}  // namespace mlbatch
