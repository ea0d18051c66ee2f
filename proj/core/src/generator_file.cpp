#include "nlmc/generator_file.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "nlmc/error.hpp"

namespace nlmc {

namespace {

using ordered_json = nlohmann::ordered_json;

[[noreturn]] void schema_error(const std::string& where, const std::string& what) {
    throw ParseError("generator file: " + where + ": " + what, 0, 0);
}

std::pair<int, int> line_column(std::string_view text, std::size_t byte) {
    int line = 1, column = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

const ordered_json& require(const ordered_json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) schema_error(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) schema_error(where, std::string("missing key '") + key + "'");
    return *it;
}

std::size_t state_index(const ordered_json& v, std::size_t dimension, const std::string& where) {
    if (!v.is_number_integer()) schema_error(where, "state index must be an integer");
    const auto i = v.get<long long>();
    if (i < 1 || static_cast<std::size_t>(i) > dimension)
        schema_error(where, "state index " + std::to_string(i) + " outside 1.." + std::to_string(dimension));
    return static_cast<std::size_t>(i - 1);
}

}  // namespace

GeneratorSpec parse_generator(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        auto [line, column] = line_column(text, e.byte);
        throw ParseError("generator file: syntax error at line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + e.what(),
                         line, column);
    }

    const auto& dim = require(doc, "dimension", "/");
    if (!dim.is_number_integer() || dim.get<long long>() < 1 ||
        dim.get<long long>() > static_cast<long long>(kMaxStates))
        schema_error("/dimension", "must be an integer between 1 and 16");
    const auto dimension = static_cast<std::size_t>(dim.get<long long>());

    const auto& cells_json = require(doc, "cells", "/");
    if (!cells_json.is_array()) schema_error("/cells", "expected an array");

    std::vector<PolynomialCell> cells;
    for (std::size_t c = 0; c < cells_json.size(); ++c) {
        const std::string where = "/cells/" + std::to_string(c);
        const auto& cj = cells_json[c];
        PolynomialCell cell;
        cell.from = state_index(require(cj, "from", where), dimension, where + "/from");
        cell.to = state_index(require(cj, "to", where), dimension, where + "/to");
        const auto& terms = require(cj, "terms", where);
        if (!terms.is_array()) schema_error(where + "/terms", "expected an array");
        for (std::size_t t = 0; t < terms.size(); ++t) {
            const std::string tw = where + "/terms/" + std::to_string(t);
            const auto& ex = require(terms[t], "exponents", tw);
            const auto& co = require(terms[t], "coefficient", tw);
            if (!ex.is_array() || ex.size() != dimension)
                schema_error(tw + "/exponents", "expected " + std::to_string(dimension) + " integers");
            PolynomialTerm term;
            for (const auto& e : ex) {
                if (!e.is_number_integer() || e.get<long long>() < 0 ||
                    e.get<long long>() > kMaxPolynomialDegree)
                    schema_error(tw + "/exponents", "exponents must be integers in 0..8");
                term.exponents.push_back(static_cast<int>(e.get<long long>()));
            }
            if (!co.is_number()) schema_error(tw + "/coefficient", "expected a number");
            term.coefficient = co.get<double>();
            cell.terms.push_back(std::move(term));
        }
        cells.push_back(std::move(cell));
    }

    std::string metadata = "{}";
    if (auto it = doc.find("metadata"); it != doc.end()) {
        if (!it->is_object()) schema_error("/metadata", "expected an object");
        metadata = it->dump();
    }
    for (const auto& [key, value] : doc.items())
        if (key != "dimension" && key != "cells" && key != "metadata")
            schema_error("/" + key, "unknown key");

    try {
        return GeneratorSpec::polynomial(dimension, std::move(cells), std::move(metadata));
    } catch (const InputError& e) {
        schema_error("/cells", e.what());
    }
}

GeneratorSpec load_generator(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open generator file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_generator(buffer.str());
}

std::string format_generator(const GeneratorSpec& spec) {
    if (spec.kind() != GeneratorSpec::Kind::polynomial)
        throw InputError("only polynomial generators can be written to a generator file");
    ordered_json doc;
    doc["dimension"] = spec.dimension();
    doc["cells"] = ordered_json::array();
    for (const auto& cell : spec.cells()) {
        ordered_json cj;
        cj["from"] = cell.from + 1;
        cj["to"] = cell.to + 1;
        cj["terms"] = ordered_json::array();
        for (const auto& term : cell.terms) {
            ordered_json tj;
            tj["exponents"] = term.exponents;
            tj["coefficient"] = term.coefficient;
            cj["terms"].push_back(std::move(tj));
        }
        doc["cells"].push_back(std::move(cj));
    }
    doc["metadata"] = ordered_json::parse(spec.metadata_json());
    return doc.dump(2) + "\n";
}

void save_generator(const GeneratorSpec& spec, const std::filesystem::path& path) {
    const std::string text = format_generator(spec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write generator file " + path.string());
    out << text;
}

}  // namespace nlmc
