#include "pwsde/config.hpp"

#include "pwsde/errors.hpp"
#include "pwsde/format.hpp"
#include "pwsde/problems.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace pwsde {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return parts;
}

double parse_number(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError("not a number: '" + std::string(s) + "'");
    return v;
}

template <class Int>
Int parse_integer(std::string_view s) {
    s = trim(s);
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ConfigError("not an integer: '" + std::string(s) + "'");
    return v;
}

std::vector<double> parse_list(std::string_view s) {
    std::vector<double> out;
    for (auto part : split(s, ',')) out.push_back(parse_number(part));
    return out;
}

// 2^k with integer k, or std::nullopt if the token is not a power form.
std::optional<int> power_exponent(std::string_view token) {
    token = trim(token);
    if (token.size() < 3 || token.substr(0, 2) != "2^") return std::nullopt;
    return parse_integer<int>(token.substr(2));
}

std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

}  // namespace

std::string_view to_string(Command c) {
    switch (c) {
    case Command::simulate: return "simulate";
    case Command::convergence: return "convergence";
    case Command::occupation: return "occupation";
    case Command::excursion: return "excursion";
    case Command::dump_transform: return "dump-transform";
    }
    return "?";
}

std::string_view to_string(SchemeChoice s) {
    switch (s) {
    case SchemeChoice::em: return "em";
    case SchemeChoice::gm: return "gm";
    case SchemeChoice::both: return "both";
    }
    return "?";
}

std::vector<double> parse_deltas(std::string_view text) {
    std::vector<double> out;
    for (auto token : split(text, ',')) {
        if (token.empty()) throw ConfigError("empty entry in delta list");
        const auto range = token.find("..");
        if (range != std::string_view::npos) {
            const auto a = power_exponent(token.substr(0, range));
            const auto b = power_exponent(token.substr(range + 2));
            if (!a || !b) throw ConfigError("delta range must read 2^-a..2^-b, got '" + std::string(token) + "'");
            const int step = *a <= *b ? 1 : -1;
            for (int k = *a;; k += step) {
                out.push_back(std::ldexp(1.0, k));
                if (k == *b) break;
            }
        } else if (const auto k = power_exponent(token)) {
            out.push_back(std::ldexp(1.0, *k));
        } else {
            out.push_back(parse_number(token));
        }
    }
    for (double d : out)
        if (!(d > 0.0)) throw ConfigError("deltas must be positive");
    return out;
}

Hypersurface parse_surface(std::string_view text) {
    text = trim(text);
    const auto open = text.find('(');
    if (open == std::string_view::npos || text.back() != ')')
        throw ConfigError("surface must read kind(args), got '" + std::string(text) + "'");
    const std::string_view kind = trim(text.substr(0, open));
    const std::string_view args = text.substr(open + 1, text.size() - open - 2);
    try {
        if (kind == "pointset1d") return Hypersurface::point_set(parse_list(args));

        std::vector<double> head;
        double scalar = 0.0;
        if (const auto semi = args.find(';'); semi != std::string_view::npos) {
            head = parse_list(args.substr(0, semi));
            scalar = parse_number(args.substr(semi + 1));
        } else {
            head = parse_list(args);
            if (head.size() < 2) throw ConfigError("surface '" + std::string(text) + "' needs a vector and a scalar");
            scalar = head.back();
            head.pop_back();
        }
        if (head.empty() || head.size() > static_cast<std::size_t>(kMaxDim))
            throw ConfigError("surface '" + std::string(text) + "' has an unsupported dimension");
        const Vec v = Eigen::Map<const Eigen::VectorXd>(head.data(), static_cast<Eigen::Index>(head.size()));
        if (kind == "hyperplane") return Hypersurface::hyperplane(v, scalar);
        if (kind == "sphere") return Hypersurface::sphere(v, scalar);
    } catch (const ArgumentError& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("unknown surface kind '" + std::string(kind) + "' (pointset1d, hyperplane, sphere)");
}

void apply_setting(ExperimentConfig& c, std::string_view key, std::string_view value, std::string_view where) {
    const std::string prefix = where.empty() ? std::string() : std::string(where) + ": ";
    key = trim(key);
    value = trim(value);
    try {
        if (key == "command") {
            if (value == "simulate") c.command = Command::simulate;
            else if (value == "convergence") c.command = Command::convergence;
            else if (value == "occupation") c.command = Command::occupation;
            else if (value == "excursion") c.command = Command::excursion;
            else if (value == "dump-transform") c.command = Command::dump_transform;
            else throw ConfigError("unknown command '" + std::string(value) + "'");
        } else if (key == "problem") {
            if (value.empty()) throw ConfigError("empty problem name");
            c.problem = std::string(value);
        } else if (key == "scheme") {
            if (value == "em") c.scheme = SchemeChoice::em;
            else if (value == "gm") c.scheme = SchemeChoice::gm;
            else if (value == "both") c.scheme = SchemeChoice::both;
            else throw ConfigError("scheme must be em, gm or both");
        } else if (key == "deltas") {
            c.deltas = parse_deltas(value);
        } else if (key == "delta") {
            const auto d = parse_deltas(value);
            if (d.size() != 1) throw ConfigError("delta takes a single step size");
            c.delta = d.front();
        } else if (key == "paths") {
            c.paths = parse_integer<std::size_t>(value);
            if (c.paths < 1) throw ConfigError("paths must be >= 1");
        } else if (key == "seed") {
            c.seed = parse_integer<std::uint64_t>(value);
        } else if (key == "ref_levels" || key == "ref-levels") {
            c.ref_levels = parse_integer<int>(value);
        } else if (key == "eps") {
            c.eps = parse_list(value);
        } else if (key == "out") {
            c.out = std::string(value);
        } else if (key == "grid") {
            c.grid = parse_integer<std::size_t>(value);
            if (c.grid < 2) throw ConfigError("grid must be >= 2");
        } else if (key == "initial") {
            c.initial = parse_list(value);
        } else if (key == "horizon") {
            c.horizon = parse_number(value);
            if (!(*c.horizon > 0.0)) throw ConfigError("horizon must be positive");
        } else if (key == "surface") {
            parse_surface(value);
            c.surface = std::string(value);
        } else {
            throw ConfigError("unknown key '" + std::string(key) + "'");
        }
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    }
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (!line.empty()) {
            const auto eq = line.find('=');
            const std::string where = "line " + std::to_string(line_no);
            if (eq == std::string_view::npos) throw ConfigError(where + ": expected key = value");
            apply_setting(base, line.substr(0, eq), line.substr(eq + 1), where);
        }
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return base;
}

std::string serialize(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "command = " << to_string(c.command) << '\n';
    out << "problem = " << c.problem << '\n';
    out << "scheme = " << to_string(c.scheme) << '\n';
    if (!c.deltas.empty()) out << "deltas = " << join(c.deltas) << '\n';
    if (c.delta) out << "delta = " << format_double(*c.delta) << '\n';
    out << "paths = " << c.paths << '\n';
    out << "seed = " << c.seed << '\n';
    out << "ref_levels = " << c.ref_levels << '\n';
    if (!c.eps.empty()) out << "eps = " << join(c.eps) << '\n';
    if (!c.out.empty()) out << "out = " << c.out << '\n';
    out << "grid = " << c.grid << '\n';
    if (c.initial) out << "initial = " << join(*c.initial) << '\n';
    if (c.horizon) out << "horizon = " << format_double(*c.horizon) << '\n';
    if (c.surface) out << "surface = " << parse_surface(*c.surface).describe() << '\n';
    return out.str();
}

SdeProblem resolve_problem(const ExperimentConfig& c) {
    SdeProblem p = problems::lookup(c.problem);
    if (c.initial) {
        if (c.initial->size() != static_cast<std::size_t>(p.dim))
            throw ConfigError("initial value for '" + p.name + "' needs " + std::to_string(p.dim) + " components");
        p.initial = Eigen::Map<const Eigen::VectorXd>(c.initial->data(), p.dim);
    }
    if (c.horizon) p.horizon = *c.horizon;
    if (c.surface) {
        Hypersurface s = parse_surface(*c.surface);
        if (s.dim() != p.dim) throw ConfigError("surface dimension does not match problem '" + p.name + "'");
        p.surface = std::move(s);
    }
    return p;
}

}  // namespace pwsde
