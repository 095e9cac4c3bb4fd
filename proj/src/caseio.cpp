#include "dadmm/caseio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <set>
#include <sstream>

namespace dadmm {

namespace {

// Cursor over the raw text that tracks line/column for error reporting.
struct Cursor {
    const std::string& text;
    std::size_t pos = 0;
    int line = 1;
    int col = 1;

    explicit Cursor(const std::string& t) : text(t) {}

    bool eof() const { return pos >= text.size(); }
    char peek() const { return text[pos]; }

    char advance() {
        char ch = text[pos++];
        if (ch == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        return ch;
    }

    void skip_ws_and_comments() {
        while (!eof()) {
            char ch = peek();
            if (ch == '%') {
                while (!eof() && peek() != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(ch))) {
                advance();
            } else {
                return;
            }
        }
    }
};

double parse_number(Cursor& cur) {
    cur.skip_ws_and_comments();
    int line = cur.line, col = cur.col;
    std::string tok;
    while (!cur.eof()) {
        char ch = cur.peek();
        if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '+' || ch == '-' ||
            ch == '.' || ch == 'e' || ch == 'E') {
            tok.push_back(cur.advance());
        } else {
            break;
        }
    }
    if (tok.empty()) throw ParseError("expected a number", line, col);
    try {
        std::size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError("malformed number '" + tok + "'", line, col);
    }
}

// Rows of a MATPOWER matrix literal: numbers separated by whitespace/commas,
// rows terminated by ';' or newline, matrix closed by ']'.
std::vector<std::vector<double>> parse_matrix(Cursor& cur) {
    cur.skip_ws_and_comments();
    if (cur.eof() || cur.peek() != '[')
        throw ParseError("expected '['", cur.line, cur.col);
    cur.advance();
    std::vector<std::vector<double>> rows;
    std::vector<double> row;
    while (true) {
        // scan forward without absorbing comments into numbers
        while (!cur.eof()) {
            char ch = cur.peek();
            if (ch == '%') {
                while (!cur.eof() && cur.peek() != '\n') cur.advance();
            } else if (ch == ' ' || ch == '\t' || ch == '\r' || ch == ',') {
                cur.advance();
            } else {
                break;
            }
        }
        if (cur.eof()) throw ParseError("unterminated matrix", cur.line, cur.col);
        char ch = cur.peek();
        if (ch == ']') {
            cur.advance();
            if (!row.empty()) rows.push_back(std::move(row));
            return rows;
        }
        if (ch == ';' || ch == '\n') {
            cur.advance();
            if (!row.empty()) rows.push_back(std::move(row));
            row.clear();
            continue;
        }
        row.push_back(parse_number(cur));
    }
}

void expect_char(Cursor& cur, char want) {
    cur.skip_ws_and_comments();
    if (cur.eof() || cur.peek() != want)
        throw ParseError(std::string("expected '") + want + "'", cur.line, cur.col);
    cur.advance();
}

std::string parse_identifier(Cursor& cur) {
    cur.skip_ws_and_comments();
    std::string id;
    while (!cur.eof()) {
        char ch = cur.peek();
        if (std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '.') {
            id.push_back(cur.advance());
        } else {
            break;
        }
    }
    return id;
}

void require_cols(const std::vector<std::vector<double>>& m, std::size_t n,
                  const std::string& table, std::vector<std::string>* warnings) {
    for (std::size_t r = 0; r < m.size(); ++r) {
        if (m[r].size() < n)
            throw ValidationError(table + " row " + std::to_string(r + 1) + " has " +
                                  std::to_string(m[r].size()) + " columns, needs " +
                                  std::to_string(n));
        if (m[r].size() > n && warnings && r == 0)
            warnings->push_back(table + ": ignoring extra columns beyond " + std::to_string(n));
    }
}

}  // namespace

int NetworkCase::bus_index(int bus_id) const {
    for (std::size_t i = 0; i < buses.size(); ++i)
        if (buses[i].id == bus_id) return static_cast<int>(i);
    throw ValidationError("unknown bus " + std::to_string(bus_id));
}

void NetworkCase::validate() const {
    if (base_mva <= 0) throw ValidationError("base MVA must be positive");
    if (buses.empty()) throw ValidationError("case has no buses");
    std::set<int> ids;
    for (const auto& b : buses) {
        if (!ids.insert(b.id).second)
            throw ValidationError("duplicate bus id " + std::to_string(b.id));
    }
    int refs = 0;
    for (const auto& b : buses)
        if (b.type == 3) ++refs;
    if (refs != 1)
        throw ValidationError("expected exactly one reference bus, found " + std::to_string(refs));
    for (const auto& br : branches) {
        if (!ids.count(br.from_bus)) throw ValidationError("unknown bus " + std::to_string(br.from_bus));
        if (!ids.count(br.to_bus)) throw ValidationError("unknown bus " + std::to_string(br.to_bus));
        if (!(br.reactance > 0))
            throw ValidationError("branch " + std::to_string(br.from_bus) + "-" +
                                  std::to_string(br.to_bus) + " has non-positive reactance");
    }
    for (const auto& g : generators) {
        if (!ids.count(g.bus)) throw ValidationError("unknown bus " + std::to_string(g.bus));
        if (g.p_min_mw > g.p_max_mw)
            throw ValidationError("generator at bus " + std::to_string(g.bus) + " has p_min > p_max");
        if (g.c2 < 0)
            throw ValidationError("generator at bus " + std::to_string(g.bus) + " has negative c2");
    }
    // connectivity over the branch graph
    if (!branches.empty() || buses.size() == 1) {
        std::map<int, std::vector<int>> adj;
        for (const auto& br : branches) {
            adj[br.from_bus].push_back(br.to_bus);
            adj[br.to_bus].push_back(br.from_bus);
        }
        std::set<int> seen;
        std::queue<int> q;
        q.push(buses.front().id);
        seen.insert(buses.front().id);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : adj[u])
                if (seen.insert(v).second) q.push(v);
        }
        if (seen.size() != buses.size()) throw ValidationError("branch graph is not connected");
    } else {
        throw ValidationError("branch graph is not connected");
    }
}

NetworkCase parse_matpower(const std::string& text, std::vector<std::string>* warnings) {
    Cursor cur(text);
    NetworkCase c;
    std::vector<std::vector<double>> bus_m, gen_m, branch_m, gencost_m;
    bool have_base = false, have_bus = false, have_gen = false, have_branch = false,
         have_gencost = false;

    while (true) {
        cur.skip_ws_and_comments();
        if (cur.eof()) break;
        int line = cur.line, col = cur.col;
        std::string id = parse_identifier(cur);
        if (id.empty()) throw ParseError("expected identifier", cur.line, cur.col);
        if (id == "function") {
            // "function mpc = name" header
            expect_char(cur, '=');
            c.name = parse_identifier(cur);
            continue;
        }
        expect_char(cur, '=');
        if (id == "mpc.baseMVA") {
            c.base_mva = parse_number(cur);
            have_base = true;
            expect_char(cur, ';');
        } else if (id == "mpc.version") {
            cur.skip_ws_and_comments();
            while (!cur.eof() && cur.peek() != ';') cur.advance();
            expect_char(cur, ';');
        } else if (id == "mpc.bus") {
            bus_m = parse_matrix(cur);
            have_bus = true;
            expect_char(cur, ';');
        } else if (id == "mpc.gen") {
            gen_m = parse_matrix(cur);
            have_gen = true;
            expect_char(cur, ';');
        } else if (id == "mpc.branch") {
            branch_m = parse_matrix(cur);
            have_branch = true;
            expect_char(cur, ';');
        } else if (id == "mpc.gencost") {
            gencost_m = parse_matrix(cur);
            have_gencost = true;
            expect_char(cur, ';');
        } else {
            if (warnings) warnings->push_back("ignoring unknown field '" + id + "'");
            cur.skip_ws_and_comments();
            if (!cur.eof() && cur.peek() == '[') {
                parse_matrix(cur);
            } else {
                while (!cur.eof() && cur.peek() != ';') cur.advance();
            }
            expect_char(cur, ';');
            (void)line;
            (void)col;
        }
    }

    if (!have_bus) throw ValidationError("missing mpc.bus table");
    if (!have_gen) throw ValidationError("missing mpc.gen table");
    if (!have_branch) throw ValidationError("missing mpc.branch table");
    if (!have_gencost) throw ValidationError("missing mpc.gencost table");
    if (!have_base) throw ValidationError("missing mpc.baseMVA");

    require_cols(bus_m, 3, "mpc.bus", warnings);
    for (const auto& r : bus_m) {
        Bus b;
        b.id = static_cast<int>(r[0]);
        b.type = static_cast<int>(r[1]);
        b.load_mw = r[2];
        if (b.type == 3) c.reference_bus = b.id;
        c.buses.push_back(b);
    }
    require_cols(gen_m, 10, "mpc.gen", warnings);
    for (const auto& r : gen_m) {
        Generator g;
        g.bus = static_cast<int>(r[0]);
        g.p_max_mw = r[8];
        g.p_min_mw = r[9];
        c.generators.push_back(g);
    }
    require_cols(branch_m, 6, "mpc.branch", warnings);
    for (const auto& r : branch_m) {
        Branch br;
        br.from_bus = static_cast<int>(r[0]);
        br.to_bus = static_cast<int>(r[1]);
        br.reactance = r[3];
        br.limit_mw = r[5] > 0 ? r[5] : std::numeric_limits<double>::infinity();
        c.branches.push_back(br);
    }
    if (gencost_m.size() != c.generators.size())
        throw ValidationError("mpc.gencost has " + std::to_string(gencost_m.size()) +
                              " rows, expected " + std::to_string(c.generators.size()));
    for (std::size_t i = 0; i < gencost_m.size(); ++i) {
        const auto& r = gencost_m[i];
        if (r.size() < 4) throw ValidationError("mpc.gencost row too short");
        if (static_cast<int>(r[0]) != 2)
            throw ValidationError("only polynomial gencost (model 2) is supported");
        int ncost = static_cast<int>(r[3]);
        if (r.size() < 4 + static_cast<std::size_t>(ncost))
            throw ValidationError("mpc.gencost row missing coefficients");
        auto& g = c.generators[i];
        if (ncost == 3) {
            g.c2 = r[4];
            g.c1 = r[5];
            g.c0 = r[6];
        } else if (ncost == 2) {
            g.c1 = r[4];
            g.c0 = r[5];
        } else if (ncost == 1) {
            g.c0 = r[4];
        } else {
            throw ValidationError("unsupported gencost degree " + std::to_string(ncost));
        }
    }

    c.validate();
    return c;
}

NetworkCase load_case_file(const std::string& path, std::vector<std::string>* warnings) {
    NetworkCase c = parse_matpower(read_text_file(path), warnings);
    if (c.name.empty()) {
        auto slash = path.find_last_of('/');
        auto base = slash == std::string::npos ? path : path.substr(slash + 1);
        auto dot = base.find_last_of('.');
        c.name = dot == std::string::npos ? base : base.substr(0, dot);
    }
    return c;
}

std::string serialize_matpower(const NetworkCase& c) {
    std::ostringstream os;
    os.precision(17);
    os << "function mpc = " << (c.name.empty() ? "case_unnamed" : c.name) << "\n";
    os << "mpc.version = '2';\n";
    os << "mpc.baseMVA = " << c.base_mva << ";\n";
    os << "%% bus_i type Pd\nmpc.bus = [\n";
    for (const auto& b : c.buses) os << "\t" << b.id << "\t" << b.type << "\t" << b.load_mw << ";\n";
    os << "];\n";
    os << "%% bus Pg Qg Qmax Qmin Vg mBase status Pmax Pmin\nmpc.gen = [\n";
    for (const auto& g : c.generators)
        os << "\t" << g.bus << "\t0\t0\t0\t0\t1\t" << c.base_mva << "\t1\t" << g.p_max_mw << "\t"
           << g.p_min_mw << ";\n";
    os << "];\n";
    os << "%% fbus tbus r x b rateA\nmpc.branch = [\n";
    for (const auto& br : c.branches)
        os << "\t" << br.from_bus << "\t" << br.to_bus << "\t0\t" << br.reactance << "\t0\t"
           << (std::isfinite(br.limit_mw) ? br.limit_mw : 0.0) << ";\n";
    os << "];\n";
    os << "%% model startup shutdown n c2 c1 c0\nmpc.gencost = [\n";
    for (const auto& g : c.generators)
        os << "\t2\t0\t0\t3\t" << g.c2 << "\t" << g.c1 << "\t" << g.c0 << ";\n";
    os << "];\n";
    return os.str();
}

NetworkCase scale_loads(const NetworkCase& c, double factor) {
    if (!(factor > 0)) throw ValidationError("load scale factor must be positive");
    NetworkCase out = c;
    for (auto& b : out.buses) b.load_mw *= factor;
    return out;
}

Partition make_partition(const NetworkCase& c, const std::map<int, int>& assignment,
                         int expected_areas) {
    Partition p;
    for (const auto& b : c.buses) {
        auto it = assignment.find(b.id);
        if (it == assignment.end())
            throw ValidationError("bus " + std::to_string(b.id) + " not assigned to any area");
        p.area_of_bus[b.id] = it->second;
    }
    for (const auto& [bus, area] : assignment) {
        bool known = false;
        for (const auto& b : c.buses) known = known || b.id == bus;
        if (!known) throw ValidationError("partition assigns unknown bus " + std::to_string(bus));
    }
    std::set<int> areas;
    for (const auto& [bus, area] : p.area_of_bus) areas.insert(area);
    p.area_ids.assign(areas.begin(), areas.end());
    if (expected_areas > 0 && static_cast<int>(areas.size()) != expected_areas)
        throw ValidationError("empty area: " + std::to_string(expected_areas) +
                              " areas requested, assignment uses " + std::to_string(areas.size()));

    std::map<int, std::set<int>> boundary;
    for (std::size_t i = 0; i < c.branches.size(); ++i) {
        const auto& br = c.branches[i];
        int af = p.area_of_bus.at(br.from_bus);
        int at = p.area_of_bus.at(br.to_bus);
        if (af != at) {
            p.tie_lines.push_back(static_cast<int>(i));
            boundary[af].insert(br.from_bus);
            boundary[at].insert(br.to_bus);
        }
    }
    for (int a : p.area_ids)
        p.boundary_buses[a] = std::vector<int>(boundary[a].begin(), boundary[a].end());
    return p;
}

std::map<int, int> parse_partition_file(const std::string& text) {
    std::map<int, int> out;
    std::istringstream is(text);
    std::string raw;
    int lineno = 0;
    while (std::getline(is, raw)) {
        ++lineno;
        auto hash = raw.find('#');
        if (hash != std::string::npos) raw.erase(hash);
        std::string s;
        for (char ch : raw)
            if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
        if (s.empty()) continue;
        auto eq = s.find('=');
        if (eq == std::string::npos) throw ParseError("expected '<bus> = <area>'", lineno, 1);
        try {
            int bus = std::stoi(s.substr(0, eq));
            int area = std::stoi(s.substr(eq + 1));
            out[bus] = area;
        } catch (const std::exception&) {
            throw ParseError("malformed bus/area id", lineno, 1);
        }
    }
    return out;
}

std::map<int, int> load_partition_file(const std::string& path) {
    return parse_partition_file(read_text_file(path));
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << content;
}

}  // namespace dadmm
