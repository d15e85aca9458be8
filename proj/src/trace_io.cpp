#include "cardiobif/trace_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "cardiobif/errors.hpp"

namespace cardiobif {

namespace {

// Component headers identify the variant on read-back.
Variant variant_from_columns(const std::vector<std::string>& cols) {
    for (const auto& c : cols) {
        if (c == "v") return Variant::modified;
        if (c == "h") return Variant::original;
    }
    throw DomainError("trace header names neither 'v' nor 'h'; not a trace file");
}

static_assert(sizeof(double) == 8);

} // namespace

void write_trace_csv(const Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DomainError("cannot write trace '" + path + "'");
    out << "t";
    for (const auto& name : component_names(trace.variant)) out << "," << name;
    out << "\n";
    out.precision(17);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << trace.times[i];
        const double* row = trace.state_at(i);
        for (std::size_t c = 0; c < trace.dim; ++c) out << "," << row[c];
        out << "\n";
    }
}

Trace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open trace '" + path + "'");
    std::string line;
    if (!std::getline(in, line))
        throw DomainError("trace '" + path + "' is empty");
    std::vector<std::string> cols;
    {
        std::istringstream header(line);
        std::string cell;
        while (std::getline(header, cell, ',')) cols.push_back(cell);
    }
    if (cols.empty() || cols[0] != "t")
        throw DomainError("trace '" + path + "': first column must be 't'");
    cols.erase(cols.begin());

    Trace tr;
    tr.variant = variant_from_columns(cols);
    const auto& expected = component_names(tr.variant);
    if (cols.size() != expected.size())
        throw DomainError("trace '" + path + "': expected " +
                          std::to_string(expected.size()) + " components, got " +
                          std::to_string(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i)
        if (cols[i] != expected[i])
            throw DomainError("trace '" + path + "': column '" + cols[i] +
                              "' out of canonical order (expected '" +
                              expected[i] + "')");
    tr.dim = cols.size();
    tr.params.variant = tr.variant;

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::size_t c = 0;
        while (std::getline(row, cell, ',')) {
            double value;
            try {
                value = std::stod(cell);
            } catch (const std::exception&) {
                throw DomainError("trace '" + path + "' line " +
                                  std::to_string(lineno) + ": bad number '" +
                                  cell + "'");
            }
            if (c == 0)
                tr.times.push_back(value);
            else
                tr.data.push_back(value);
            ++c;
        }
        if (c != tr.dim + 1)
            throw DomainError("trace '" + path + "' line " +
                              std::to_string(lineno) + ": wrong column count");
    }
    if (tr.times.size() < 2)
        throw DomainError("trace '" + path + "' has fewer than 2 records");
    return tr;
}

void write_trace_binary(const Trace& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("cannot write trace '" + path + "'");
    const std::uint64_t n_cols = trace.dim + 1;
    const std::uint64_t n_rows = trace.size();
    out.write(reinterpret_cast<const char*>(&n_cols), 8);
    out.write(reinterpret_cast<const char*>(&n_rows), 8);
    std::vector<double> row(n_cols);
    for (std::size_t i = 0; i < trace.size(); ++i) {
        row[0] = trace.times[i];
        std::memcpy(row.data() + 1, trace.state_at(i), trace.dim * 8);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(n_cols * 8));
    }
}

Trace read_trace_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("cannot open trace '" + path + "'");
    std::uint64_t n_cols = 0, n_rows = 0;
    in.read(reinterpret_cast<char*>(&n_cols), 8);
    in.read(reinterpret_cast<char*>(&n_rows), 8);
    if (!in) throw DomainError("trace '" + path + "': truncated header");

    Trace tr;
    if (n_cols == LayoutOriginal::dim + 1)
        tr.variant = Variant::original;
    else if (n_cols == LayoutModified::dim + 1)
        tr.variant = Variant::modified;
    else
        throw DomainError("trace '" + path + "': column count " +
                          std::to_string(n_cols) + " matches no variant");
    tr.dim = n_cols - 1;
    tr.params.variant = tr.variant;
    tr.times.resize(n_rows);
    tr.data.resize(n_rows * tr.dim);
    std::vector<double> row(n_cols);
    for (std::uint64_t i = 0; i < n_rows; ++i) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(n_cols * 8));
        if (!in)
            throw DomainError("trace '" + path + "': truncated at record " +
                              std::to_string(i));
        tr.times[i] = row[0];
        std::memcpy(tr.data.data() + i * tr.dim, row.data() + 1, tr.dim * 8);
    }
    return tr;
}

} // namespace cardiobif
