#pragma once

#include <string>
#include <vector>

#include "peg/pgd.hpp"
#include "peg/query.hpp"

namespace peg {

// PGD documents.
Pgd pgd_from_json_text(const std::string& text);
std::string pgd_to_json_text(const Pgd& pgd);
Pgd load_pgd_file(const std::string& path);
void save_pgd_file(const Pgd& pgd, const std::string& path);

// Query documents.
QueryGraph query_from_json_text(const std::string& text);
std::string query_to_json_text(const QueryGraph& q);
QueryGraph load_query_file(const std::string& path);
void save_query_file(const QueryGraph& q, const std::string& path);

// Result sets. Matches are emitted with string ids resolved against the
// graph's node table; rows are expected pre-sorted.
struct ResultRow {
    std::vector<std::pair<std::string, std::string>> mapping;  // query id -> entity id
    double pr_le = 0.0;
    double pr_n = 0.0;
    double probability = 0.0;
};

std::string results_to_json_text(const std::vector<ResultRow>& rows);
std::string results_to_csv_text(const std::vector<ResultRow>& rows);
std::vector<ResultRow> results_from_json_text(const std::string& text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace peg
