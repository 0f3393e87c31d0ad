// SPDX-License-Identifier: Apache-2.0
//
// hpl - hybrid precoding library for multiuser MIMO downlink simulation
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef HPL_CSV_HPP
#define HPL_CSV_HPP

#include "hpl/experiment.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace hpl {

inline constexpr std::string_view kCsvHeader =
    "strategy,snr_db,mean_sum_se,std_sum_se,trials,mean_build_seconds";

namespace detail {

inline std::string format_g12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace detail

inline void emit_csv(const ExperimentResult& result, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& c : result.cells) {
        out << to_string(c.strategy) << ',' << detail::format_g12(c.snr_db) << ','
            << detail::format_g12(c.mean_sum_se) << ',' << detail::format_g12(c.std_sum_se) << ','
            << c.trials << ',' << detail::format_g12(c.mean_build_seconds) << '\n';
    }
}

inline void emit_csv(const ExperimentResult& result, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    emit_csv(result, out);
    out.flush();
    if (!out)
        throw std::runtime_error("write to '" + path + "' failed");
}

struct CsvRow {
    std::string strategy;
    double snr_db = 0.0;
    double mean_sum_se = 0.0;
    double std_sum_se = 0.0;
    Index trials = 0;
    double mean_build_seconds = 0.0;
};

inline std::vector<CsvRow> parse_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader)
        throw InvalidInput("parse_csv: missing or unexpected header");
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            const auto c = line.find(',', start);
            f.push_back(line.substr(start, c == std::string::npos ? std::string::npos : c - start));
            if (c == std::string::npos)
                break;
            start = c + 1;
        }
        if (f.size() != 6)
            throw InvalidInput("parse_csv: expected 6 fields in '" + line + "'");
        rows.push_back({f[0], std::stod(f[1]), std::stod(f[2]), std::stod(f[3]),
                        static_cast<Index>(std::stoll(f[4])), std::stod(f[5])});
    }
    return rows;
}

} // namespace hpl

#endif // HPL_CSV_HPP
