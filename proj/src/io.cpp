#include "precis/io.hpp"

#include <charconv>
#include <algorithm>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "precis/error.hpp"

namespace precis::io {

namespace {

struct Line {
    int number = 0;
    std::vector<std::string> tokens;
};

std::vector<std::string> split(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    std::string t;
    while (ss >> t) {
        out.push_back(t);
    }
    return out;
}

class Reader {
public:
    Reader(std::istream& is, std::string source) : source_(std::move(source)) {
        std::string text;
        int number = 0;
        while (std::getline(is, text)) {
            ++number;
            const auto hash = text.find('#');
            if (hash != std::string::npos) {
                text.erase(hash);
            }
            auto tokens = split(text);
            if (!tokens.empty()) {
                lines_.push_back({number, std::move(tokens)});
            }
        }
        last_line_ = number;
    }

    [[nodiscard]] bool done() const { return pos_ >= lines_.size(); }
    [[nodiscard]] int last_line() const { return last_line_; }
    const Line& next(const std::string& expecting) {
        if (done()) {
            error(last_line_, "unexpected end of input, expected " + expecting);
        }
        return lines_[pos_++];
    }

    [[noreturn]] void error(int line, const std::string& msg) const {
        fail(ErrorCode::Parse, source_ + ":" + std::to_string(line) + ": " + msg);
    }

    double number(const Line& l, std::size_t i, const std::string& field) const {
        const std::string& t = l.tokens[i];
        double v = 0.0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
            if (t == "inf" || t == "+inf") {
                return std::numeric_limits<double>::infinity();
            }
            if (t == "-inf") {
                return -std::numeric_limits<double>::infinity();
            }
            error(l.number, field + ": '" + t + "' is not a number");
        }
        return v;
    }

    long integer(const Line& l, std::size_t i, const std::string& field) const {
        const std::string& t = l.tokens[i];
        long v = 0;
        const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
        if (res.ec != std::errc() || res.ptr != t.data() + t.size() || v < 0) {
            error(l.number, field + ": '" + t + "' is not a non-negative integer");
        }
        return v;
    }

    Matrix matrix(const std::string& field) {
        const Line& head = next(field + " dimensions");
        if (head.tokens.size() != 2) {
            error(head.number, field + ": expected 'rows cols'");
        }
        const long rows = integer(head, 0, field + " rows");
        const long cols = integer(head, 1, field + " cols");
        Matrix m(rows, cols);
        for (long r = 0; r < rows; ++r) {
            const Line& l = next(field + " row " + std::to_string(r + 1));
            if (static_cast<long>(l.tokens.size()) != cols) {
                error(l.number, field + " row " + std::to_string(r + 1) + ": expected " + std::to_string(cols) +
                                    " values, found " + std::to_string(l.tokens.size()));
            }
            for (long c = 0; c < cols; ++c) {
                m(r, c) = number(l, static_cast<std::size_t>(c), field);
            }
        }
        return m;
    }

private:
    std::string source_;
    std::vector<Line> lines_;
    std::size_t pos_ = 0;
    int last_line_ = 0;
};

// Key/value lines and named matrix sections, each remembered with its line.
struct Document {
    std::map<std::string, std::pair<std::string, int>> keys;
    std::map<std::string, std::pair<Matrix, int>> sections;
    std::string header;
    int header_line = 0;
};

Document parse_document(Reader& rd, bool expect_header) {
    Document doc;
    if (expect_header) {
        const Line& h = rd.next("header");
        if (h.tokens.size() != 2 || h.tokens[0] != "precis-result") {
            rd.error(h.number, "expected header 'precis-result 1'");
        }
        doc.header = h.tokens[1];
        doc.header_line = h.number;
    }
    while (!rd.done()) {
        const Line& l = rd.next("section");
        const std::string& name = l.tokens[0];
        if (l.tokens.size() == 1) {
            if (doc.sections.count(name)) {
                rd.error(l.number, "duplicate section " + name);
            }
            doc.sections[name] = {rd.matrix(name), l.number};
        } else if (l.tokens.size() == 2) {
            if (doc.keys.count(name)) {
                rd.error(l.number, "duplicate key " + name);
            }
            doc.keys[name] = {l.tokens[1], l.number};
        } else {
            rd.error(l.number, "expected a section name or 'key value', found " +
                                   std::to_string(l.tokens.size()) + " fields");
        }
    }
    return doc;
}

const Matrix& section(const Document& doc, const Reader& rd, const std::string& name, int last_line) {
    const auto it = doc.sections.find(name);
    if (it == doc.sections.end()) {
        rd.error(last_line, "missing section " + name);
    }
    return it->second.first;
}

PlantWithSensors plant_from(const Document& doc, const Reader& rd, int last_line) {
    PlantWithSensors pw;
    pw.plant.A = section(doc, rd, "A", last_line);
    pw.plant.Bd = section(doc, rd, "B_d", last_line);
    pw.plant.Cz = section(doc, rd, "C_z", last_line);
    const Matrix& cy = section(doc, rd, "C_y", last_line);
    auto line_of = [&](const char* name) { return doc.sections.at(name).second; };
    const Index nx = pw.plant.A.rows();
    if (pw.plant.A.cols() != nx) {
        rd.error(line_of("A"), "A: must be square");
    }
    if (pw.plant.Bd.rows() != nx) {
        rd.error(line_of("B_d"), "B_d: expected " + std::to_string(nx) + " rows");
    }
    if (pw.plant.Cz.cols() != nx) {
        rd.error(line_of("C_z"), "C_z: expected " + std::to_string(nx) + " columns");
    }
    if (cy.cols() != nx || cy.rows() < 1) {
        rd.error(line_of("C_y"), "C_y: expected at least one row of " + std::to_string(nx) + " columns");
    }
    const Index ns = cy.rows();
    Matrix dd = Matrix::Zero(ns, pw.plant.nd());
    if (doc.sections.count("D_d")) {
        dd = doc.sections.at("D_d").first;
        if (dd.rows() != ns || dd.cols() != pw.plant.nd()) {
            rd.error(line_of("D_d"), "D_d: expected " + std::to_string(ns) + "x" + std::to_string(pw.plant.nd()));
        }
    }
    Vector w = Vector::Ones(ns);
    if (doc.sections.count("weights")) {
        const Matrix& wm = doc.sections.at("weights").first;
        if (wm.rows() != ns || wm.cols() != 1) {
            rd.error(line_of("weights"), "weights: expected " + std::to_string(ns) + "x1");
        }
        if ((wm.array() <= 0.0).any()) {
            rd.error(line_of("weights"), "weights: entries must be positive");
        }
        w = wm.col(0);
    }
    std::vector<SensorDef> sensors;
    for (Index i = 0; i < ns; ++i) {
        sensors.push_back({static_cast<int>(i), cy.row(i), dd.row(i), "s" + std::to_string(i + 1)});
    }
    pw.catalog = SensorCatalog(std::move(sensors), w);
    return pw;
}

void write_section(std::ostream& os, const std::string& name, const Matrix& m) {
    os << name << '\n';
    write_matrix(os, m);
}

std::string key(const Document& doc, const Reader& rd, const std::string& name, int last_line) {
    const auto it = doc.keys.find(name);
    if (it == doc.keys.end()) {
        rd.error(last_line, "missing key " + name);
    }
    return it->second.first;
}

double key_number(const Document& doc, const Reader& rd, const std::string& name, int last_line) {
    const std::string v = key(doc, rd, name, last_line);
    Line l{doc.keys.at(name).second, {v}};
    return rd.number(l, 0, name);
}

}  // namespace

void write_matrix(std::ostream& os, const Matrix& m) {
    os << m.rows() << ' ' << m.cols() << '\n';
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            os << (c ? " " : "") << format_double(m(r, c));
        }
        os << '\n';
    }
}

Matrix read_matrix(std::istream& is, const std::string& source) {
    Reader rd(is, source);
    Matrix m = rd.matrix("matrix");
    if (!rd.done()) {
        const Line& extra = rd.next("end");
        rd.error(extra.number, "unexpected content after the matrix");
    }
    return m;
}

Matrix parse_matrix(const std::string& text, const std::string& source) {
    std::istringstream is(text);
    return read_matrix(is, source);
}

void write_plant(std::ostream& os, const PlantWithSensors& pw) {
    const Index ns = pw.catalog.size();
    Matrix cy(ns, pw.plant.nx());
    Matrix dd(ns, pw.plant.nd());
    for (Index i = 0; i < ns; ++i) {
        const auto& s = pw.catalog.sensor(static_cast<int>(i));
        cy.row(i) = s.C;
        dd.row(i) = s.D.size() ? RowVector(s.D) : RowVector::Zero(pw.plant.nd());
    }
    write_section(os, "A", pw.plant.A);
    write_section(os, "B_d", pw.plant.Bd);
    write_section(os, "C_z", pw.plant.Cz);
    write_section(os, "C_y", cy);
    write_section(os, "D_d", dd);
    write_section(os, "weights", pw.catalog.weights());
}

PlantWithSensors read_plant(std::istream& is, const std::string& source) {
    Reader rd(is, source);
    const Document doc = parse_document(rd, false);
    const int last = rd.last_line();
    for (const auto& [name, entry] : doc.keys) {
        rd.error(entry.second, "unexpected key '" + name + "' in a plant file");
    }
    for (const auto& [name, entry] : doc.sections) {
        if (name != "A" && name != "B_d" && name != "C_z" && name != "C_y" && name != "D_d" && name != "weights") {
            rd.error(entry.second, "unknown section '" + name + "'");
        }
    }
    return plant_from(doc, rd, last);
}

PlantWithSensors load_plant(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::Io, "cannot open plant file " + path);
    }
    return read_plant(in, path);
}

void write_result(std::ostream& os, const PlantWithSensors& pw, const estimator::EstimatorResult& r) {
    const auto& d = r.diagnostics;
    os << "precis-result 1\n";
    os << "framework " << to_string(r.spec.framework) << '\n';
    os << "estimator " << to_string(r.spec.kind) << '\n';
    os << "gamma " << format_double(r.spec.gamma) << '\n';
    os << "subset " << r.spec.subset.to_string() << '\n';
    os << "objective " << format_double(r.objective) << '\n';
    os << "norm " << format_double(r.norm) << '\n';
    os << "certified " << (r.certified ? 1 : 0) << '\n';
    os << "status " << admm::to_string(d.status) << '\n';
    os << "iterations " << d.iterations << '\n';
    os << "primal_residual " << format_double(d.primal_residual) << '\n';
    os << "dual_residual " << format_double(d.dual_residual) << '\n';
    os << "solver_objective " << format_double(d.solver_objective) << '\n';
    os << "delta " << format_double(d.delta) << '\n';
    os << "lmi_margin " << format_double(d.lmi_margin) << '\n';
    os << "lmi_certified " << (d.lmi_certified ? 1 : 0) << '\n';
    write_plant(os, pw);
    write_section(os, "rho", r.weights);
    write_section(os, "p", r.p);
    const auto& m = r.matrices;
    if (m.kind == EstimatorKind::Observer) {
        write_section(os, "L", m.L);
    } else {
        write_section(os, "A_F", m.AF);
        write_section(os, "B_F", m.BF);
        write_section(os, "C_F", m.CF);
    }
}

ResultFile read_result(std::istream& is, const std::string& source) {
    Reader rd(is, source);
    const Document doc = parse_document(rd, true);
    if (doc.header != "1") {
        rd.error(doc.header_line, "unsupported result version " + doc.header);
    }
    const int last = rd.last_line();
    ResultFile out;
    out.plant = plant_from(doc, rd, last);
    auto& r = out.result;
    auto& spec = r.spec;
    try {
        spec.framework = parse_framework(key(doc, rd, "framework", last));
        spec.kind = parse_estimator(key(doc, rd, "estimator", last));
        spec.subset = parse_subset(key(doc, rd, "subset", last), out.plant.catalog.size());
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Parse) {
            throw;
        }
        rd.error(last, e.what());
    }
    spec.gamma = key_number(doc, rd, "gamma", last);
    r.objective = key_number(doc, rd, "objective", last);
    r.norm = key_number(doc, rd, "norm", last);
    r.certified = key_number(doc, rd, "certified", last) != 0.0;
    auto& d = r.diagnostics;
    const std::string status = key(doc, rd, "status", last);
    if (status == "converged") {
        d.status = admm::AdmmStatus::Converged;
    } else if (status == "max-iter") {
        d.status = admm::AdmmStatus::MaxIter;
    } else if (status == "infeasible") {
        d.status = admm::AdmmStatus::Infeasible;
    } else {
        rd.error(doc.keys.at("status").second, "status: unknown value '" + status + "'");
    }
    d.iterations = static_cast<int>(key_number(doc, rd, "iterations", last));
    d.primal_residual = key_number(doc, rd, "primal_residual", last);
    d.dual_residual = key_number(doc, rd, "dual_residual", last);
    d.solver_objective = key_number(doc, rd, "solver_objective", last);
    d.delta = key_number(doc, rd, "delta", last);
    d.lmi_margin = key_number(doc, rd, "lmi_margin", last);
    d.lmi_certified = key_number(doc, rd, "lmi_certified", last) != 0.0;

    const Index ny = spec.subset.size();
    auto column = [&](const std::string& name) {
        const Matrix& m = section(doc, rd, name, last);
        if (m.rows() != ny || m.cols() != 1) {
            rd.error(doc.sections.at(name).second, name + ": expected " + std::to_string(ny) + "x1");
        }
        return Vector(m.col(0));
    };
    r.weights = column("rho");
    spec.rho = r.weights;
    r.p = column("p");
    if ((r.p.array() <= 0.0).any()) {
        rd.error(doc.sections.at("p").second, "p: precisions must be positive");
    }
    r.matrices.kind = spec.kind;
    if (spec.kind == EstimatorKind::Observer) {
        r.matrices.L = section(doc, rd, "L", last);
    } else {
        r.matrices.AF = section(doc, rd, "A_F", last);
        r.matrices.BF = section(doc, rd, "B_F", last);
        r.matrices.CF = section(doc, rd, "C_F", last);
    }
    return out;
}

ResultFile load_result(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        fail(ErrorCode::Io, "cannot open result file " + path);
    }
    return read_result(in, path);
}

SensorSubset parse_subset(const std::string& text, Index catalog_size) {
    std::vector<int> ids;
    std::string token;
    std::istringstream ss(text);
    while (std::getline(ss, token, ',')) {
        const auto b = token.find_first_not_of(" \t");
        const auto e = token.find_last_not_of(" \t");
        if (b == std::string::npos) {
            fail(ErrorCode::InvalidArgument, "subset '" + text + "': empty entry");
        }
        token = token.substr(b, e - b + 1);
        int v = 0;
        const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
        if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
            fail(ErrorCode::InvalidArgument, "subset '" + text + "': '" + token + "' is not an integer");
        }
        if (v < 1 || v > catalog_size) {
            fail(ErrorCode::InvalidSensor, "subset '" + text + "': sensor " + token + " is outside 1.." +
                                               std::to_string(catalog_size));
        }
        ids.push_back(v - 1);
    }
    if (ids.empty()) {
        fail(ErrorCode::EmptySubset, "subset '" + text + "' is empty");
    }
    return SensorSubset(ids);
}

Vector parse_vector(const std::string& text, const std::string& what) {
    std::vector<double> vals;
    std::string token;
    std::istringstream ss(text);
    while (std::getline(ss, token, ',')) {
        const auto b = token.find_first_not_of(" \t");
        const auto e = token.find_last_not_of(" \t");
        if (b == std::string::npos) {
            fail(ErrorCode::InvalidArgument, what + ": empty entry in '" + text + "'");
        }
        token = token.substr(b, e - b + 1);
        double v = 0.0;
        const auto res = std::from_chars(token.data(), token.data() + token.size(), v);
        if (res.ec != std::errc() || res.ptr != token.data() + token.size()) {
            fail(ErrorCode::InvalidArgument, what + ": '" + token + "' is not a number");
        }
        vals.push_back(v);
    }
    if (vals.empty()) {
        fail(ErrorCode::InvalidArgument, what + ": no values");
    }
    return Eigen::Map<Vector>(vals.data(), static_cast<Index>(vals.size()));
}

}  // namespace precis::io
