#include "gggp/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "gggp/errors.hpp"

namespace gggp {

namespace {

struct Token {
    enum class Kind { NonTerminal, Terminal, Bar, Defines };
    Kind kind;
    std::string text;
    std::size_t line;
    std::size_t column;
    std::size_t offset;
};

auto is_name_char(char c) -> bool
{
    return !std::isspace(static_cast<unsigned char>(c)) && c != '<' && c != '>' && c != '|' && c != '#';
}

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) { }

    auto run() -> std::vector<Token>
    {
        std::vector<Token> out;
        while (pos_ < text_.size()) {
            char const c = text_[pos_];
            if (c == '#') {
                while (pos_ < text_.size() && text_[pos_] != '\n') { advance(); }
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '|') {
                out.push_back(make(Token::Kind::Bar, "|"));
                advance();
            } else if (text_.substr(pos_, 3) == "::=") {
                out.push_back(make(Token::Kind::Defines, "::="));
                advance(3);
            } else if (auto len = nonterminal_length(pos_); len > 0) {
                out.push_back(make(Token::Kind::NonTerminal, std::string(text_.substr(pos_ + 1, len - 2))));
                advance(len);
            } else {
                auto tok = make(Token::Kind::Terminal, "");
                while (pos_ < text_.size()) {
                    char const d = text_[pos_];
                    if (std::isspace(static_cast<unsigned char>(d)) || d == '|' || d == '#') { break; }
                    if (text_.substr(pos_, 3) == "::=" || nonterminal_length(pos_) > 0) { break; }
                    tok.text.push_back(d);
                    advance();
                }
                out.push_back(std::move(tok));
            }
        }
        return out;
    }

private:
    // Length of a `<name>` starting at p, or 0 when there is none.
    [[nodiscard]] auto nonterminal_length(std::size_t p) const -> std::size_t
    {
        if (p >= text_.size() || text_[p] != '<') { return 0; }
        std::size_t q = p + 1;
        while (q < text_.size() && is_name_char(text_[q])) { ++q; }
        if (q == p + 1 || q >= text_.size() || text_[q] != '>') { return 0; }
        return q - p + 1;
    }

    auto make(Token::Kind kind, std::string text) const -> Token
    {
        return {kind, std::move(text), line_, column_, pos_};
    }

    void advance(std::size_t n = 1)
    {
        for (std::size_t i = 0; i < n && pos_ < text_.size(); ++i, ++pos_) {
            if (text_[pos_] == '\n') {
                ++line_;
                column_ = 1;
            } else {
                ++column_;
            }
        }
    }

    std::string_view text_;
    std::size_t pos_{0};
    std::size_t line_{1};
    std::size_t column_{1};
};

[[noreturn]] void syntax_error(Token const& at, std::string const& message)
{
    std::ostringstream os;
    os << "grammar syntax error at line " << at.line << ", column " << at.column << ": " << message;
    throw ParseError(os.str(), at.line, at.column, at.offset);
}

} // namespace

auto compute_min_depths(std::vector<RuleSource> const& rules) -> std::vector<int>
{
    constexpr int unknown = std::numeric_limits<int>::max();
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < rules.size(); ++i) { index.emplace(rules[i].name, i); }

    std::vector<int> depth(rules.size(), unknown);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < rules.size(); ++i) {
            for (auto const& alt : rules[i].alternatives) {
                int deepest = 0;
                for (auto const& sym : alt) {
                    if (!sym.is_nonterminal()) { continue; }
                    auto it = index.find(sym.text);
                    int const d = it == index.end() ? unknown : depth[it->second];
                    deepest = std::max(deepest, d);
                }
                if (deepest == unknown) { continue; }
                if (deepest + 1 < depth[i]) {
                    depth[i] = deepest + 1;
                    changed = true;
                }
            }
        }
    }
    for (std::size_t i = 0; i < rules.size(); ++i) {
        if (depth[i] == unknown) {
            throw GrammarError("non-terminal <" + rules[i].name + "> has no finite terminal derivation");
        }
    }
    return depth;
}

Grammar::Grammar(std::vector<RuleSource> rules)
{
    if (rules.empty()) { throw GrammarError("grammar has no rules"); }

    std::unordered_map<std::string, std::size_t> index;
    for (auto const& rule : rules) {
        if (rule.name.empty()) { throw GrammarError("empty non-terminal name"); }
        if (!index.emplace(rule.name, names_.size()).second) {
            throw GrammarError("non-terminal <" + rule.name + "> is defined more than once");
        }
        if (rule.alternatives.empty()) {
            throw GrammarError("non-terminal <" + rule.name + "> has no alternatives");
        }
        names_.push_back(rule.name);
    }

    productions_.resize(rules.size());
    for (std::size_t nt = 0; nt < rules.size(); ++nt) {
        auto& prods = productions_[nt];
        for (auto const& alt : rules[nt].alternatives) {
            if (alt.empty()) {
                throw GrammarError("non-terminal <" + rules[nt].name + "> has an empty alternative");
            }
            Production p;
            p.index = prods.size();
            p.symbols = alt;
            for (auto& sym : p.symbols) {
                if (sym.text.empty()) { throw GrammarError("empty symbol in <" + rules[nt].name + ">"); }
                if (!sym.is_nonterminal()) {
                    sym.ref = npos;
                    continue;
                }
                auto it = index.find(sym.text);
                if (it == index.end()) {
                    throw GrammarError("reference to undefined non-terminal <" + sym.text + "> in rule <" + rules[nt].name + ">");
                }
                sym.ref = it->second;
            }
            prods.push_back(std::move(p));
        }
    }

    min_depth_ = compute_min_depths(rules);

    // A non-terminal is recursive when it can reach itself.
    recursive_.assign(names_.size(), 0);
    for (std::size_t root = 0; root < names_.size(); ++root) {
        std::vector<char> seen(names_.size(), 0);
        std::vector<std::size_t> stack;
        auto push_children = [&](std::size_t nt) {
            for (auto const& p : productions_[nt]) {
                for (auto const& s : p.symbols) {
                    if (s.is_nonterminal() && seen[s.ref] == 0) {
                        seen[s.ref] = 1;
                        stack.push_back(s.ref);
                    }
                }
            }
        };
        push_children(root);
        while (!stack.empty()) {
            auto nt = stack.back();
            stack.pop_back();
            push_children(nt);
        }
        recursive_[root] = seen[root];
    }

    for (auto& prods : productions_) {
        for (auto& p : prods) {
            int deepest = 0;
            for (auto const& s : p.symbols) {
                if (!s.is_nonterminal()) { continue; }
                deepest = std::max(deepest, min_depth_[s.ref]);
                p.recursive = p.recursive || recursive_[s.ref] != 0;
            }
            p.min_depth = deepest + 1;
        }
    }
}

auto Grammar::find(std::string_view name) const -> std::optional<std::size_t>
{
    auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) { return std::nullopt; }
    return static_cast<std::size_t>(it - names_.begin());
}

auto Grammar::index_of(std::string_view name) const -> std::size_t
{
    auto i = find(name);
    if (!i) { throw GrammarError("unknown non-terminal <" + std::string(name) + ">"); }
    return *i;
}

auto Grammar::feasible(std::size_t nt, int budget) const -> std::vector<std::size_t>
{
    std::vector<std::size_t> out;
    for (auto const& p : productions_.at(nt)) {
        if (p.min_depth <= budget) { out.push_back(p.index); }
    }
    return out;
}

auto Grammar::rules() const -> std::vector<RuleSource>
{
    std::vector<RuleSource> out;
    out.reserve(names_.size());
    for (std::size_t nt = 0; nt < names_.size(); ++nt) {
        RuleSource r{names_[nt], {}};
        for (auto const& p : productions_[nt]) { r.alternatives.push_back(p.symbols); }
        out.push_back(std::move(r));
    }
    return out;
}

auto parse_grammar(std::string_view text) -> Grammar
{
    auto const tokens = Lexer(text).run();
    std::vector<RuleSource> rules;

    auto starts_rule = [&](std::size_t i) {
        return i + 1 < tokens.size() && tokens[i].kind == Token::Kind::NonTerminal
            && tokens[i + 1].kind == Token::Kind::Defines;
    };

    std::size_t i = 0;
    while (i < tokens.size()) {
        if (!starts_rule(i)) { syntax_error(tokens[i], "expected `<name> ::=`, found '" + tokens[i].text + "'"); }
        auto const& head = tokens[i];
        RuleSource rule{head.text, {}};
        i += 2;

        std::vector<Symbol> current;
        Token const* last = &tokens[i - 1];
        while (i < tokens.size() && !starts_rule(i)) {
            auto const& t = tokens[i];
            switch (t.kind) {
            case Token::Kind::Bar:
                if (current.empty()) { syntax_error(t, "empty alternative in <" + rule.name + ">"); }
                rule.alternatives.push_back(std::move(current));
                current.clear();
                break;
            case Token::Kind::Defines:
                syntax_error(t, "unexpected '::='");
            case Token::Kind::NonTerminal:
                current.push_back(Symbol::nonterminal(t.text));
                break;
            case Token::Kind::Terminal:
                current.push_back(Symbol::terminal(t.text));
                break;
            }
            last = &t;
            ++i;
        }
        if (current.empty()) {
            if (rule.alternatives.empty()) {
                throw GrammarError("non-terminal <" + rule.name + "> has no alternatives (line "
                                   + std::to_string(head.line) + ")");
            }
            syntax_error(*last, "empty alternative in <" + rule.name + ">");
        }
        rule.alternatives.push_back(std::move(current));
        rules.push_back(std::move(rule));
    }
    if (rules.empty()) { throw GrammarError("grammar has no rules"); }
    return Grammar(std::move(rules));
}

auto load_grammar(std::string const& path) -> Grammar
{
    std::ifstream in(path, std::ios::binary);
    if (!in) { throw GrammarError("cannot open grammar file '" + path + "'"); }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_grammar(ss.str());
}

auto to_bnf(Grammar const& g) -> std::string
{
    std::ostringstream os;
    for (std::size_t nt = 0; nt < g.size(); ++nt) {
        auto const head = "<" + g.name(nt) + "> ::=";
        auto const& alts = g.alternatives(nt);
        for (std::size_t a = 0; a < alts.size(); ++a) {
            if (a == 0) {
                os << head;
            } else {
                os << std::string(head.size() - 1, ' ') << '|';
            }
            for (auto const& s : alts[a].symbols) {
                os << ' ' << (s.is_nonterminal() ? "<" + s.text + ">" : s.text);
            }
            os << "  #(" << a << ")\n";
        }
        os << '\n';
    }
    return os.str();
}

auto min_depths(Grammar const& g) -> std::map<std::string, int>
{
    std::map<std::string, int> out;
    for (std::size_t nt = 0; nt < g.size(); ++nt) { out.emplace(g.name(nt), g.min_depth(nt)); }
    return out;
}

auto with_variables(Grammar const& g, std::span<std::string const> names, std::string_view nonterminal) -> Grammar
{
    auto rules = g.rules();
    auto it = std::find_if(rules.begin(), rules.end(), [&](auto const& r) { return r.name == nonterminal; });
    if (it == rules.end()) {
        throw GrammarError("grammar has no <" + std::string(nonterminal) + "> rule to inject variables into");
    }
    if (names.empty()) { throw GrammarError("no variables to inject"); }
    it->alternatives.clear();
    for (auto const& n : names) { it->alternatives.push_back({Symbol::terminal(n)}); }
    return Grammar(std::move(rules));
}

auto validate_phenotype(Grammar const& g, std::string_view text) -> bool
{
    std::vector<std::string> tokens;
    std::istringstream in{std::string(text)};
    for (std::string t; in >> t;) { tokens.push_back(std::move(t)); }
    return validate_phenotype(g, std::span<std::string const>(tokens));
}

} // namespace gggp
