#include "spalps/parser.hpp"

#include <cctype>
#include <set>
#include <string>
#include <vector>

namespace spalps {

namespace {

enum class Tok {
    Ident, Keyword, Int, Decimal,
    LBrace, RBrace, LParen, RParen,
    Semi, Colon, Comma, Dot, Question, Equals, Star, At, Plus, Minus, Slash,
    End,
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    SourcePos pos;
};

const std::set<std::string> kKeywords = {
    "species", "process", "param", "habitat", "ring", "graph", "nodes", "edges",
    "system", "restrict", "pchoice", "over", "neighbors", "nil", "tick", "go",
    "in", "out", "par", "myloc", "it",
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_trivia();
            Token t = next_token();
            out.push_back(t);
            if (t.kind == Tok::End) break;
        }
        return out;
    }

private:
    void skip_trivia() {
        while (i_ < text_.size()) {
            char c = text_[i_];
            if (c == '#') {
                while (i_ < text_.size() && text_[i_] != '\n') ++i_;
            } else if (c == '\n') {
                ++i_; ++line_; col_ = 1;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++i_; ++col_;
            } else {
                break;
            }
        }
    }

    Token next_token() {
        Token t;
        t.pos = {line_, col_};
        if (i_ >= text_.size()) return t;
        char c = text_[i_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t j = i_;
            while (j < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_'))
                ++j;
            t.text = text_.substr(i_, j - i_);
            t.kind = kKeywords.count(t.text) ? Tok::Keyword : Tok::Ident;
            advance(j - i_);
            return t;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i_;
            while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j;
            // A dot makes a decimal only with digits directly on both sides.
            if (j + 1 < text_.size() && text_[j] == '.' &&
                std::isdigit(static_cast<unsigned char>(text_[j + 1]))) {
                ++j;
                while (j < text_.size() && std::isdigit(static_cast<unsigned char>(text_[j]))) ++j;
                t.kind = Tok::Decimal;
            } else {
                t.kind = Tok::Int;
            }
            t.text = text_.substr(i_, j - i_);
            advance(j - i_);
            return t;
        }
        t.text = std::string(1, c);
        switch (c) {
            case '{': t.kind = Tok::LBrace; break;
            case '}': t.kind = Tok::RBrace; break;
            case '(': t.kind = Tok::LParen; break;
            case ')': t.kind = Tok::RParen; break;
            case ';': t.kind = Tok::Semi; break;
            case ':': t.kind = Tok::Colon; break;
            case ',': t.kind = Tok::Comma; break;
            case '.': t.kind = Tok::Dot; break;
            case '?': t.kind = Tok::Question; break;
            case '=': t.kind = Tok::Equals; break;
            case '*': t.kind = Tok::Star; break;
            case '@': t.kind = Tok::At; break;
            case '+': t.kind = Tok::Plus; break;
            case '-': t.kind = Tok::Minus; break;
            case '/': t.kind = Tok::Slash; break;
            default:
                throw ParseError("unexpected character `" + std::string(1, c) + "`", t.pos);
        }
        advance(1);
        return t;
    }

    void advance(size_t n) { i_ += n; col_ += static_cast<int>(n); }

    const std::string& text_;
    size_t i_ = 0;
    int line_ = 1;
    int col_ = 1;
};

class Parser {
public:
    Parser(std::vector<Token> toks, std::string source_name)
        : toks_(std::move(toks)) {
        model_.source_name = std::move(source_name);
    }

    ModelSpec run() {
        while (!at(Tok::End)) parse_item();
        if (!saw_system_) throw ParseError("model has no system block", peek().pos);
        if (!model_.has_habitat) throw ParseError("model has no habitat declaration", peek().pos);
        return std::move(model_);
    }

private:
    // ---- token plumbing ----
    const Token& peek(int k = 0) const {
        size_t i = pos_ + k;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    bool at(Tok k) const { return peek().kind == k; }
    bool at_kw(const char* kw) const {
        return peek().kind == Tok::Keyword && peek().text == kw;
    }
    Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    Token expect(Tok k, const char* what) {
        if (!at(k)) throw ParseError(std::string("expected ") + what + before(), peek().pos);
        return take();
    }
    Token expect_kw(const char* kw) {
        if (!at_kw(kw)) throw ParseError("expected `" + std::string(kw) + "`" + before(), peek().pos);
        return take();
    }
    std::string before() const {
        if (peek().kind == Tok::End) return " before end of input";
        return " before `" + peek().text + "`";
    }

    // ---- items ----
    void parse_item() {
        if (at_kw("param")) { parse_param(); return; }
        if (at_kw("habitat")) { parse_habitat(); return; }
        if (at_kw("species")) { parse_species(); return; }
        if (at_kw("system")) { parse_system(); return; }
        throw ParseError("expected `param`, `habitat`, `species`, or `system`" + before(),
                         peek().pos);
    }

    void parse_param() {
        Token kw = take();
        Token name = expect(Tok::Ident, "parameter name");
        expect(Tok::Equals, "`=`");
        Rational v = parse_number();
        for (const auto& [n, _] : model_.params)
            if (n == name.text)
                throw ParseError("duplicate parameter `" + name.text + "`", name.pos);
        model_.params.emplace_back(name.text, v);
        model_.param_pos.push_back(kw.pos);
    }

    Rational parse_number() {
        if (at(Tok::Decimal)) return decimal_to_rational(take());
        Token n = expect(Tok::Int, "number");
        std::int64_t num = to_int(n);
        if (at(Tok::Slash)) {
            take();
            Token d = expect(Tok::Int, "denominator");
            std::int64_t den = to_int(d);
            if (den == 0) throw ParseError("zero denominator", d.pos);
            return Rational(num, den);
        }
        return Rational(num);
    }

    std::int64_t to_int(const Token& t) const {
        if (t.text.size() > 18) throw ParseError("integer literal too large", t.pos);
        return std::stoll(t.text);
    }

    Rational decimal_to_rational(const Token& t) const {
        size_t dot = t.text.find('.');
        std::string whole = t.text.substr(0, dot);
        std::string frac = t.text.substr(dot + 1);
        if (whole.size() + frac.size() > 18)
            throw ParseError("decimal literal too large", t.pos);
        std::int64_t scale = 1;
        for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
        return Rational(std::stoll(whole) * scale + std::stoll(frac), scale);
    }

    void parse_habitat() {
        Token kw = take();
        if (model_.has_habitat) throw ParseError("duplicate habitat declaration", kw.pos);
        model_.has_habitat = true;
        model_.habitat.pos = kw.pos;
        if (at_kw("ring")) {
            take();
            expect(Tok::LParen, "`(`");
            Token n = expect(Tok::Int, "ring size");
            expect(Tok::RParen, "`)`");
            model_.habitat.kind = Habitat::Kind::Ring;
            model_.habitat.ring_size = static_cast<int>(to_int(n));
            return;
        }
        expect_kw("graph");
        model_.habitat.kind = Habitat::Kind::Graph;
        expect(Tok::LBrace, "`{`");
        expect_kw("nodes");
        while (true) {
            Token n = expect(Tok::Ident, "node name");
            model_.habitat.node_names.push_back(n.text);
            if (at(Tok::Comma)) { take(); continue; }
            break;
        }
        expect(Tok::Semi, "`;`");
        if (at_kw("edges")) {
            take();
            if (!at(Tok::Semi)) {
                while (true) {
                    Token a = expect(Tok::Ident, "edge endpoint");
                    expect(Tok::Minus, "`-`");
                    Token b = expect(Tok::Ident, "edge endpoint");
                    model_.habitat.edges.emplace_back(a.text, b.text);
                    if (at(Tok::Comma)) { take(); continue; }
                    break;
                }
            }
            expect(Tok::Semi, "`;`");
        }
        expect(Tok::RBrace, "`}`");
    }

    void parse_species() {
        Token kw = take();
        SpeciesDef sp;
        sp.pos = kw.pos;
        sp.name = expect(Tok::Ident, "species name").text;
        expect(Tok::LBrace, "`{`");
        while (at_kw("process")) {
            take();
            Token name = expect(Tok::Ident, "process name");
            expect(Tok::Equals, "`=`");
            TermPtr t = parse_term();
            for (const auto& [n, _] : sp.defs)
                if (n == name.text)
                    throw ParseError("duplicate process `" + name.text + "`", name.pos);
            sp.defs.emplace_back(name.text, t);
        }
        expect(Tok::RBrace, "`}`");
        model_.species.push_back(std::move(sp));
    }

    void parse_system() {
        Token kw = take();
        if (saw_system_) throw ParseError("duplicate system block", kw.pos);
        saw_system_ = true;
        model_.system_pos = kw.pos;
        expect(Tok::LBrace, "`{`");
        while (!at(Tok::RBrace)) {
            SystemEntry e;
            e.pos = peek().pos;
            e.term = parse_term();
            expect(Tok::At, "`@`");
            if (at(Tok::Ident) || at(Tok::Int)) {
                e.loc_token = take().text;
            } else {
                throw ParseError("expected location" + before(), peek().pos);
            }
            expect(Tok::Star, "`*`");
            Token c = expect(Tok::Int, "population count");
            e.count = to_int(c);
            expect(Tok::Semi, "`;`");
            model_.system_entries.push_back(std::move(e));
        }
        expect(Tok::RBrace, "`}`");
        if (at_kw("restrict")) {
            take();
            expect(Tok::LBrace, "`{`");
            while (at(Tok::Ident)) {
                std::string ch = take().text;
                bool dup = false;
                for (const auto& c : model_.restricted) dup = dup || c == ch;
                if (!dup) model_.restricted.push_back(ch);
                if (at(Tok::Comma)) take();
            }
            expect(Tok::RBrace, "`}`");
        }
    }

    // ---- terms ----
    TermPtr parse_term() {
        SourcePos pos = peek().pos;
        TermPtr t = parse_term_inner();
        const_cast<ProcessTerm*>(t.get())->pos = pos;
        return t;
    }

    TermPtr parse_term_inner() {
        if (at_kw("nil")) { take(); return ProcessTerm::nil(); }
        if (at(Tok::LParen)) {
            take();
            TermPtr t = parse_term();
            expect(Tok::RParen, "`)`");
            return t;
        }
        if (at_kw("par")) {
            take();
            expect(Tok::LParen, "`(`");
            std::vector<TermPtr> parts;
            parts.push_back(parse_term());
            while (at(Tok::Comma)) { take(); parts.push_back(parse_term()); }
            expect(Tok::RParen, "`)`");
            if (parts.size() < 2)
                throw ParseError("par(...) needs at least two components", peek().pos);
            return ProcessTerm::parallel(std::move(parts));
        }
        if (at_kw("pchoice")) {
            take();
            if (at_kw("over")) {
                take();
                expect_kw("neighbors");
                expect(Tok::LBrace, "`{`");
                TermPtr body = parse_term();
                expect(Tok::RBrace, "`}`");
                return ProcessTerm::neighbor_choice(body);
            }
            expect(Tok::LBrace, "`{`");
            std::vector<std::pair<ProbExpr, TermPtr>> branches;
            while (true) {
                ProbExpr p = parse_prob();
                expect(Tok::Colon, "`:`");
                TermPtr b = parse_term();
                branches.emplace_back(std::move(p), std::move(b));
                if (at(Tok::Semi)) {
                    take();
                    if (at(Tok::RBrace)) break;  // trailing `;`
                    continue;
                }
                break;
            }
            expect(Tok::RBrace, "`}`");
            return ProcessTerm::prob_choice(std::move(branches));
        }
        if (at_kw("tick") || at_kw("go") || at_kw("in") || at_kw("out"))
            return parse_prefixed();
        if (at(Tok::Ident)) {
            Token name = take();
            if (at(Tok::Question)) return parse_cond_comm(Action::input(name.text));
            return ProcessTerm::const_ref(name.text);
        }
        throw ParseError("expected a process term" + before(), peek().pos);
    }

    TermPtr parse_prefixed() {
        Token kw = take();
        if (kw.text == "tick") return prefix_rest(Action::tick());
        if (kw.text == "go") {
            LocationExpr dest = parse_locexpr();
            return prefix_rest(Action::go(dest));
        }
        // `in ch` / `out ch`, as a prefix or a conditional-communication head.
        Token ch = expect(Tok::Ident, "channel name");
        bool output = kw.text == "out";
        if (at(Tok::Question)) {
            Action g = output ? Action::output(ch.text) : Action::input(ch.text);
            return parse_cond_comm(std::move(g));
        }
        return prefix_rest(output ? Action::output(ch.text) : Action::input(ch.text));
    }

    TermPtr prefix_rest(Action a) {
        expect(Tok::Dot, "`.` after action prefix");
        TermPtr cont = parse_term();
        return ProcessTerm::prefix(std::move(a), std::move(cont));
    }

    TermPtr parse_cond_comm(Action gamma) {
        expect(Tok::Question, "`?`");
        expect(Tok::LParen, "`(`");
        TermPtr then_b = parse_term();
        expect(Tok::Comma, "`,`");
        TermPtr else_b = parse_term();
        expect(Tok::RParen, "`)`");
        return ProcessTerm::cond_comm(std::move(gamma), std::move(then_b), std::move(else_b));
    }

    LocationExpr parse_locexpr() {
        if (at_kw("myloc")) {
            take();
            if (at(Tok::Plus) || at(Tok::Minus)) {
                bool neg = take().kind == Tok::Minus;
                Token n = expect(Tok::Int, "offset");
                int k = static_cast<int>(to_int(n));
                return LocationExpr::myloc_offset(neg ? -k : k);
            }
            return LocationExpr::myloc();
        }
        if (at_kw("it")) { take(); return LocationExpr::it(); }
        if (at(Tok::Ident) || at(Tok::Int)) return LocationExpr::literal_loc(take().text);
        throw ParseError("expected a location" + before(), peek().pos);
    }

    ProbExpr parse_prob() {
        // `1 - x` is the complement form; a lone `1` is the literal one.
        if (at(Tok::Int) && peek().text == "1" && peek(1).kind == Tok::Minus) {
            take();
            take();
            return parse_prob_atom().complemented();
        }
        return parse_prob_atom();
    }

    ProbExpr parse_prob_atom() {
        if (at(Tok::Ident)) return ProbExpr::param_ref(take().text);
        if (at(Tok::Decimal) || at(Tok::Int)) return ProbExpr::literal(parse_number());
        throw ParseError("expected a probability" + before(), peek().pos);
    }

    std::vector<Token> toks_;
    size_t pos_ = 0;
    ModelSpec model_;
    bool saw_system_ = false;
};

}  // namespace

ModelSpec parse_model(const std::string& text, const std::string& source_name) {
    Lexer lex(text);
    Parser p(lex.run(), source_name);
    return p.run();
}

std::string render_model(const ModelSpec& m) {
    std::string out;
    for (const auto& [n, v] : m.params) out += "param " + n + " = " + v.str() + "\n";
    if (!m.params.empty()) out += "\n";

    if (m.has_habitat) {
        if (m.habitat.kind == Habitat::Kind::Ring) {
            out += "habitat ring(" + std::to_string(m.habitat.ring_size) + ")\n\n";
        } else {
            out += "habitat graph {\n  nodes ";
            for (size_t i = 0; i < m.habitat.node_names.size(); ++i) {
                if (i) out += ", ";
                out += m.habitat.node_names[i];
            }
            out += ";\n  edges ";
            for (size_t i = 0; i < m.habitat.edges.size(); ++i) {
                if (i) out += ", ";
                out += m.habitat.edges[i].first + " - " + m.habitat.edges[i].second;
            }
            out += ";\n}\n\n";
        }
    }

    for (const auto& sp : m.species) {
        out += "species " + sp.name + " {\n";
        for (const auto& [n, t] : sp.defs) out += "  process " + n + " = " + t->text() + "\n";
        out += "}\n\n";
    }

    out += "system {\n";
    for (const auto& e : m.system_entries)
        out += "  " + e.term->text() + " @ " + e.loc_token + " * " + std::to_string(e.count) + ";\n";
    out += "} restrict { ";
    for (size_t i = 0; i < m.restricted.size(); ++i) {
        if (i) out += ", ";
        out += m.restricted[i];
    }
    out += m.restricted.empty() ? "}\n" : " }\n";
    return out;
}

Rational parse_rational(const std::string& text) {
    SourcePos none{0, 0};
    std::string s = text;
    bool negative = false;
    if (!s.empty() && (s[0] == '-' || s[0] == '+')) {
        negative = s[0] == '-';
        s.erase(0, 1);
    }
    if (s.empty()) throw ParseError("empty number", none);
    auto all_digits = [](const std::string& t) {
        if (t.empty()) return false;
        for (char c : t) {
            if (c < '0' || c > '9') return false;
        }
        return true;
    };
    Rational r;
    size_t slash = s.find('/');
    size_t dot = s.find('.');
    if (slash != std::string::npos) {
        std::string num = s.substr(0, slash), den = s.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den) || num.size() > 18 || den.size() > 18) {
            throw ParseError("malformed rational `" + text + "`", none);
        }
        std::int64_t d = std::stoll(den);
        if (d == 0) throw ParseError("zero denominator in `" + text + "`", none);
        r = Rational(std::stoll(num), d);
    } else if (dot != std::string::npos) {
        std::string whole = s.substr(0, dot), frac = s.substr(dot + 1);
        if (!all_digits(whole) || !all_digits(frac) || whole.size() + frac.size() > 18) {
            throw ParseError("malformed decimal `" + text + "`", none);
        }
        std::int64_t scale = 1;
        for (size_t i = 0; i < frac.size(); ++i) scale *= 10;
        r = Rational(std::stoll(whole) * scale + std::stoll(frac), scale);
    } else {
        if (!all_digits(s) || s.size() > 18) {
            throw ParseError("malformed number `" + text + "`", none);
        }
        r = Rational(std::stoll(s));
    }
    return negative ? -r : r;
}

}  // namespace spalps
