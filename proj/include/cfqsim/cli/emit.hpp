#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace cfqsim::cli {

using json = nlohmann::ordered_json;

/// One table for CSV output: a header and stringified rows.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

/// %.17g with C-locale '.' decimal point; reproduces the double exactly on
/// read-back.
std::string format_double(double value);

/// RFC 4180: fields containing comma, quote or newline are quoted with
/// doubled inner quotes; rows end in LF.
std::string to_csv(const Table& table);

/// Indented JSON with stable (insertion-order) keys and a trailing newline.
std::string to_json_text(const json& doc);

}  // namespace cfqsim::cli
