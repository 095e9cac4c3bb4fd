#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace dadmm {

// Parse failure with source location.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, int line, int col)
        : std::runtime_error("parse error at line " + std::to_string(line) + ", col " +
                             std::to_string(col) + ": " + msg),
          line(line),
          col(col) {}
    int line;
    int col;
};

// A structurally valid file describing an invalid network.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg)
        : std::runtime_error("validation error: " + msg) {}
};

struct Bus {
    int id = 0;
    int type = 1;  // 1 PQ, 2 PV, 3 reference
    double load_mw = 0.0;
};

struct Branch {
    int from_bus = 0;
    int to_bus = 0;
    double reactance = 0.0;  // p.u.
    double limit_mw = 0.0;   // +inf when unlimited
};

struct Generator {
    int bus = 0;
    double p_min_mw = 0.0;
    double p_max_mw = 0.0;
    double c2 = 0.0;  // $/MW^2 h
    double c1 = 0.0;  // $/MWh
    double c0 = 0.0;  // $/h
};

struct NetworkCase {
    std::string name;
    double base_mva = 100.0;
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;
    int reference_bus = -1;

    int bus_index(int bus_id) const;  // throws ValidationError on unknown id
    void validate() const;
};

// Bus-to-area assignment with derived boundary structure.
struct Partition {
    std::map<int, int> area_of_bus;
    std::vector<int> area_ids;                      // sorted, unique
    std::map<int, std::vector<int>> boundary_buses; // area id -> sorted bus ids
    std::vector<int> tie_lines;                     // indices into NetworkCase::branches

    int num_areas() const { return static_cast<int>(area_ids.size()); }
};

NetworkCase parse_matpower(const std::string& text, std::vector<std::string>* warnings = nullptr);
NetworkCase load_case_file(const std::string& path, std::vector<std::string>* warnings = nullptr);
std::string serialize_matpower(const NetworkCase& c);

NetworkCase scale_loads(const NetworkCase& c, double factor);

// expected_areas = 0 infers the area count from the assignment.
Partition make_partition(const NetworkCase& c, const std::map<int, int>& assignment,
                         int expected_areas = 0);

// Sidecar format: one "<bus id> = <area id>" per line, '#' comments.
std::map<int, int> parse_partition_file(const std::string& text);
std::map<int, int> load_partition_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace dadmm
