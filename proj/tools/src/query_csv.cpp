#include "query_csv.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <ostream>

#include "run_config.hpp"

namespace ttsurrogate::cli {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string field = line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        out.push_back(first == std::string::npos ? std::string{} : field.substr(first, last - first + 1));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_number(const std::string& s, std::size_t line, const std::string& column) {
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) {
        throw ConfigError("line " + std::to_string(line) + ", column '" + column + "': '" + s + "' is not a number");
    }
    return v;
}

}  // namespace

RowMatrix read_query_csv(const std::filesystem::path& path, const FeatureGrid& grid) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open query file " + path.string());
    const std::vector<std::string> names = grid.names();
    const std::size_t f = names.size();

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") != std::string::npos) {
            header = split(line);
            break;
        }
    }
    if (header.empty()) return RowMatrix(0, static_cast<Eigen::Index>(f));

    const bool has_price = header.size() == f + 1 && header.back() == "price";
    if (header.size() != f && !has_price) {
        throw ConfigError("query header has " + std::to_string(header.size()) + " columns, model expects " +
                          std::to_string(f) + " features");
    }
    for (std::size_t k = 0; k < f; ++k) {
        if (header[k] != names[k]) {
            throw ConfigError("query column " + std::to_string(k + 1) + " is '" + header[k] + "', model expects '" +
                              names[k] + "'");
        }
    }

    std::vector<double> values;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split(line);
        if (fields.size() != header.size()) {
            throw ConfigError("line " + std::to_string(line_no) + " has " + std::to_string(fields.size()) +
                              " fields, header has " + std::to_string(header.size()));
        }
        for (std::size_t k = 0; k < f; ++k) values.push_back(parse_number(fields[k], line_no, names[k]));
    }
    const auto rows = static_cast<Eigen::Index>(values.size() / f);
    RowMatrix x(rows, static_cast<Eigen::Index>(f));
    std::copy(values.begin(), values.end(), x.data());
    return x;
}

void write_price_csv(std::ostream& os, const FeatureGrid& grid, const RowMatrix& x, std::span<const double> prices) {
    for (const auto& name : grid.names()) os << name << ',';
    os << "price\n";
    os.precision(std::numeric_limits<double>::max_digits10);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index k = 0; k < x.cols(); ++k) os << x(i, k) << ',';
        os << prices[static_cast<std::size_t>(i)] << '\n';
    }
}

}  // namespace ttsurrogate::cli
