#include "fpl/config.hpp"

#include <charconv>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "fpl/errors.hpp"
#include "fpl/format.hpp"

namespace fpl {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = s.find(sep, pos);
        out.push_back(trim(s.substr(pos, next - pos)));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw input_error(where + ": " + what);
}

double parse_double(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        fail(where, "expected a number, got '" + t + "'");
    return v;
}

template <class Int>
Int parse_integer(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    Int v{};
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc{} || ptr != t.data() + t.size())
        fail(where, "expected an integer, got '" + t + "'");
    return v;
}

std::vector<double> parse_double_list(const std::string& text, const std::string& where) {
    std::vector<double> out;
    for (const std::string& item : split(text, ','))
        out.push_back(parse_double(item, where));
    return out;
}

ExperimentKind parse_kind(const std::string& text, const std::string& where) {
    for (ExperimentKind k :
         {ExperimentKind::solution_rate, ExperimentKind::energy_rate, ExperimentKind::eigen_rate,
          ExperimentKind::gradient_bound, ExperimentKind::poincare})
        if (text == kind_name(k)) return k;
    fail(where, "unknown experiment kind '" + text +
                    "' (expected solution_rate, energy_rate, eigen_rate, gradient_bound, or "
                    "poincare)");
}

// Routes one key=value pair into the config; `where` names the source
// location for error messages.
void set_key(RunConfig& cfg, const std::string& section, const std::string& key,
             const std::string& value, const std::string& where) {
    LadderConfig& lad = cfg.ladder;
    if (section == "problem") {
        if (key == "norm") {
            lad.norm_text = value;
            return;
        }
        if (key == "p") {
            lad.p = parse_double(value, where);
            return;
        }
        if (key == "f") {
            lad.f_const = parse_double(value, where);
            return;
        }
        if (key == "f_values") {
            lad.f_values = parse_double_list(value, where);
            return;
        }
    } else if (section == "mesh") {
        if (key == "axis_dim") {
            lad.axis_dim = parse_integer<int>(value, where);
            return;
        }
        if (key == "cross") {
            lad.cross_box.clear();
            for (const std::string& interval : split(value, ';')) {
                const std::vector<std::string> ends = split(interval, ',');
                if (ends.size() != 2)
                    fail(where, "cross expects 'lo,hi' intervals separated by ';'");
                lad.cross_box.emplace_back(parse_double(ends[0], where),
                                           parse_double(ends[1], where));
            }
            return;
        }
        if (key == "h_axis") {
            lad.h_axis = parse_double(value, where);
            return;
        }
        if (key == "h_cross") {
            lad.h_cross = parse_double(value, where);
            return;
        }
        if (key == "ell") {
            cfg.ell = parse_double(value, where);
            return;
        }
    } else if (section == "solver") {
        if (key == "tol_grad") {
            lad.solver.tol_grad = parse_double(value, where);
            return;
        }
        if (key == "tol_energy") {
            lad.solver.tol_energy = parse_double(value, where);
            return;
        }
        if (key == "max_iters") {
            lad.solver.max_iters = parse_integer<int>(value, where);
            return;
        }
        if (key == "eps_schedule") {
            lad.solver.eps_schedule = parse_double_list(value, where);
            return;
        }
        if (key == "seed") {
            lad.solver.seed = parse_integer<std::uint64_t>(value, where);
            return;
        }
    } else if (section == "ladder") {
        if (key == "kind") {
            lad.kind = parse_kind(value, where);
            return;
        }
        if (key == "ell_list") {
            lad.ell_list = parse_double_list(value, where);
            for (std::size_t i = 0; i + 1 < lad.ell_list.size(); ++i)
                if (!(lad.ell_list[i + 1] > lad.ell_list[i]))
                    fail(where, "ell_list must be increasing");
            return;
        }
        if (key == "seeds") {
            lad.seeds.clear();
            for (const std::string& item : split(value, ','))
                lad.seeds.push_back(parse_integer<std::uint64_t>(item, where));
            return;
        }
    } else {
        fail(where, "unknown section [" + section + "]");
    }
    fail(where, "unknown key '" + key + "' in [" + section + "]");
}

} // namespace

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string where = "line " + std::to_string(lineno);
        const std::size_t hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail(where, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section != "problem" && section != "mesh" && section != "solver" &&
                section != "ladder")
                fail(where, "unknown section [" + section + "]");
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) fail(where, "expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail(where, "empty key");
        if (section.empty()) fail(where, "key '" + key + "' appears before any section");
        set_key(cfg, section, key, value, where);
    }
    return cfg;
}

std::string print_config(const RunConfig& cfg) {
    const LadderConfig& lad = cfg.ladder;
    std::string out;
    const auto list = [](const std::vector<double>& v) {
        std::string s;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (i) s += ',';
            s += fmt_double(v[i]);
        }
        return s;
    };
    out += "[problem]\n";
    out += "norm = " + lad.norm_text + "\n";
    out += "p = " + fmt_double(lad.p) + "\n";
    out += "f = " + fmt_double(lad.f_const) + "\n";
    if (!lad.f_values.empty()) out += "f_values = " + list(lad.f_values) + "\n";
    out += "[mesh]\n";
    out += "axis_dim = " + std::to_string(lad.axis_dim) + "\n";
    out += "cross = ";
    for (std::size_t i = 0; i < lad.cross_box.size(); ++i) {
        if (i) out += "; ";
        out += fmt_double(lad.cross_box[i].first) + "," + fmt_double(lad.cross_box[i].second);
    }
    out += "\n";
    out += "h_axis = " + fmt_double(lad.h_axis) + "\n";
    out += "h_cross = " + fmt_double(lad.h_cross) + "\n";
    out += "ell = " + fmt_double(cfg.ell) + "\n";
    out += "[solver]\n";
    out += "tol_grad = " + fmt_double(lad.solver.tol_grad) + "\n";
    out += "tol_energy = " + fmt_double(lad.solver.tol_energy) + "\n";
    out += "max_iters = " + std::to_string(lad.solver.max_iters) + "\n";
    if (!lad.solver.eps_schedule.empty())
        out += "eps_schedule = " + list(lad.solver.eps_schedule) + "\n";
    out += "seed = " + std::to_string(lad.solver.seed) + "\n";
    out += "[ladder]\n";
    out += std::string("kind = ") + kind_name(lad.kind) + "\n";
    if (!lad.ell_list.empty()) out += "ell_list = " + list(lad.ell_list) + "\n";
    out += "seeds = ";
    for (std::size_t i = 0; i < lad.seeds.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(lad.seeds[i]);
    }
    out += "\n";
    return out;
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const std::string where = "--set " + assignment;
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos) fail(where, "expected section.key=value");
    const std::string path = trim(assignment.substr(0, eq));
    const std::string value = trim(assignment.substr(eq + 1));
    const std::size_t dot = path.find('.');
    if (dot == std::string::npos) fail(where, "expected section.key=value");
    set_key(cfg, trim(path.substr(0, dot)), trim(path.substr(dot + 1)), value, where);
}

} // namespace fpl
