#include "dnsarsa/weights_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>
#include <system_error>
#include <vector>

#include "dnsarsa/errors.hpp"

namespace dnsarsa {

namespace {
constexpr std::string_view kMagic = "DN-SARSA-W v1 K=";
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_weights(std::ostream& os, const Matrix& w) {
    if (w.rows() != w.cols()) throw ConfigError("weight matrix must be square");
    os << kMagic << w.rows() << '\n';
    for (std::size_t i = 0; i < w.rows(); ++i) {
        for (std::size_t j = 0; j < w.cols(); ++j) os << (j ? " " : "") << format_double(w(i, j));
        os << '\n';
    }
}

Matrix read_weights(std::istream& is, std::size_t expected_k) {
    std::string line;
    if (!std::getline(is, line)) throw ParseError("empty weight file", 1);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind(kMagic, 0) != 0) throw ParseError("bad weight file header", 1);

    std::size_t k = 0;
    const std::string_view rest = std::string_view(line).substr(kMagic.size());
    const auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), k);
    if (ec != std::errc() || ptr != rest.data() + rest.size() || k == 0)
        throw ParseError("bad K in weight file header", 1);
    if (expected_k != 0 && k != expected_k)
        throw ParseError("weight file has K=" + std::to_string(k) + ", expected K=" + std::to_string(expected_k), 1);

    Matrix w = Matrix::square(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t lineno = i + 2;
        if (!std::getline(is, line)) throw ParseError("missing weight row", lineno);
        std::istringstream row(line);
        std::string tok;
        std::size_t j = 0;
        while (row >> tok) {
            if (j >= k) throw ParseError("too many values in weight row", lineno);
            double v = 0.0;
            const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (r.ec != std::errc() || r.ptr != tok.data() + tok.size())
                throw ParseError("bad number '" + tok + "'", lineno);
            w(i, j++) = v;
        }
        if (j != k) throw ParseError("too few values in weight row", lineno);
    }
    while (std::getline(is, line))
        if (line.find_first_not_of(" \t\r") != std::string::npos) throw ParseError("trailing data after weights", k + 2);
    return w;
}

void save_weights(const Matrix& w, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    write_weights(os, w);
    if (!os) throw std::runtime_error("failed writing " + path);
}

Matrix load_weights(const std::string& path, std::size_t expected_k) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open " + path);
    return read_weights(is, expected_k);
}

}  // namespace dnsarsa
