#include "rlop/mdp_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace rlop {

std::string format_double(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void save_mdp(const Mdp& m, std::ostream& out) {
    out << "rlop-mdp 1\n";
    out << "n_states " << m.n_states << "\n";
    out << "n_actions " << m.n_actions << "\n";
    out << "gamma " << format_double(m.gamma) << "\n";
    out << "transition\n";
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions; ++a)
            for (int s2 = 0; s2 < m.n_states; ++s2)
                if (m.p(s, a, s2) != 0.0)
                    out << s << ' ' << a << ' ' << s2 << ' '
                        << format_double(m.p(s, a, s2)) << "\n";
    out << "end\n";
    out << "reward\n";
    for (int s = 0; s < m.n_states; ++s)
        for (int a = 0; a < m.n_actions; ++a)
            for (int s2 = 0; s2 < m.n_states; ++s2)
                if (m.r(s, a, s2) != 0.0)
                    out << s << ' ' << a << ' ' << s2 << ' '
                        << format_double(m.r(s, a, s2)) << "\n";
    out << "end\n";
}

void save_mdp_file(const Mdp& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    save_mdp(m, out);
    if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

struct LineReader {
    std::istream& in;
    int line_number = 0;

    // Next meaningful line with comments stripped; false at end of input.
    bool next(std::string& out_line) {
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_number;
            const auto hash = raw.find('#');
            if (hash != std::string::npos) raw.erase(hash);
            std::size_t i = 0;
            while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
            std::size_t j = raw.size();
            while (j > i && std::isspace(static_cast<unsigned char>(raw[j - 1]))) --j;
            if (j > i) {
                out_line = raw.substr(i, j - i);
                return true;
            }
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& message) const {
        std::ostringstream out;
        out << "mdp parse error at line " << line_number << ": " << message;
        throw std::runtime_error(out.str());
    }
};

} // namespace

Mdp load_mdp(std::istream& in) {
    LineReader reader{in};
    std::string line;

    if (!reader.next(line) || line != "rlop-mdp 1")
        reader.fail("expected header 'rlop-mdp 1'");

    Mdp m;
    auto read_kv = [&](const char* key, auto& value) {
        if (!reader.next(line)) reader.fail(std::string("expected '") + key + "'");
        std::istringstream fields(line);
        std::string name;
        fields >> name >> value;
        if (name != key || fields.fail())
            reader.fail(std::string("expected '") + key + " <value>', got '" + line + "'");
    };
    read_kv("n_states", m.n_states);
    read_kv("n_actions", m.n_actions);
    read_kv("gamma", m.gamma);
    if (m.n_states < 1 || m.n_actions < 1) reader.fail("dimensions must be positive");

    const std::size_t size =
        static_cast<std::size_t>(m.n_states) * m.n_actions * m.n_states;
    m.transition.assign(size, 0.0);
    m.reward_sas.assign(size, 0.0);

    auto read_block = [&](const char* name, std::vector<double>& tensor) {
        if (!reader.next(line) || line != name)
            reader.fail(std::string("expected '") + name + "' block");
        while (true) {
            if (!reader.next(line)) reader.fail("unterminated block (missing 'end')");
            if (line == "end") break;
            std::istringstream fields(line);
            int s = -1, a = -1, s2 = -1;
            double value = 0.0;
            fields >> s >> a >> s2 >> value;
            if (fields.fail()) reader.fail("expected '<s> <a> <s'> <value>'");
            if (s < 0 || s >= m.n_states || a < 0 || a >= m.n_actions || s2 < 0 ||
                s2 >= m.n_states)
                reader.fail("index out of range");
            tensor[m.idx(s, a, s2)] = value;
        }
    };
    read_block("transition", m.transition);
    read_block("reward", m.reward_sas);

    const ValidationReport report = validate_mdp(m);
    if (!report.ok())
        throw std::runtime_error("loaded MDP is invalid:\n" + report.to_string());
    return m;
}

Mdp load_mdp_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open: " + path);
    return load_mdp(in);
}

} // namespace rlop
