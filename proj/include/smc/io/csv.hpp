#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace smc::io {

/// Minimal RFC 4180 writer: fields containing a comma, quote or line break
/// are quoted with doubled inner quotes; rows end with a bare LF.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void row(const std::vector<std::string>& fields);

private:
    std::ostream& out_;
};

std::string csvField(std::string_view text);

/// Parses one logical row (quoted fields may span lines). Returns false at
/// end of input. Throws ConfigError on an unterminated quote.
bool readCsvRow(std::istream& in, std::vector<std::string>& fields);

/// %.17g; "nan", "inf" and "-inf" for non-finite values.
std::string formatReal(double value);

}  // namespace smc::io
