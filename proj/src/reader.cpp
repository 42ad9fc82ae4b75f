#include "chrism/reader.hpp"

#include <cctype>
#include <cstdlib>
#include <map>

#include "chrism/errors.hpp"

namespace chrism {

namespace {

enum class OpType { xfx, xfy, yfx };

struct InfixOp {
    int priority;
    OpType type;
};

const std::map<std::string, InfixOp>& infix_ops() {
    static const std::map<std::string, InfixOp> ops = {
        {"times", {1190, OpType::xfx}}, {"<=>", {1180, OpType::xfx}},
        {"==>", {1180, OpType::xfx}},   {"<==>", {1180, OpType::xfx}},
        {"===>", {1180, OpType::xfx}},  {"??", {1150, OpType::xfx}},
        {"\\", {1120, OpType::xfx}},    {";", {1100, OpType::xfy}},
        {"|", {1100, OpType::xfy}},     {"->", {1050, OpType::xfy}},
        {",", {1000, OpType::xfy}},     {"<", {700, OpType::xfx}},
        {">", {700, OpType::xfx}},      {"=<", {700, OpType::xfx}},
        {">=", {700, OpType::xfx}},     {"=:=", {700, OpType::xfx}},
        {"=\\=", {700, OpType::xfx}},   {"==", {700, OpType::xfx}},
        {"\\==", {700, OpType::xfx}},   {"=", {700, OpType::xfx}},
        {"is", {700, OpType::xfx}},     {"+", {500, OpType::yfx}},
        {"-", {500, OpType::yfx}},      {"*", {400, OpType::yfx}},
        {"/", {400, OpType::yfx}},      {"//", {400, OpType::yfx}},
        {"mod", {400, OpType::yfx}},    {":", {200, OpType::xfx}},
    };
    return ops;
}

struct PrefixOp {
    int priority;
    int arg_priority;
};

const std::map<std::string, PrefixOp>& prefix_ops() {
    static const std::map<std::string, PrefixOp> ops = {
        {"??", {1150, 1150}},
        {"cond", {999, 999}},
        {"~", {900, 900}},
        {"-", {200, 200}},
    };
    return ops;
}

bool is_symbol_char(char c) {
    return std::string_view("+-*/\\<>=~:.?@#&^$").find(c) != std::string_view::npos;
}

}  // namespace

TermReader::TermReader(std::string_view text) : text_(text) { advance(); }

void TermReader::fail(const std::string& message) const {
    throw ParseError(message, tok_.line, tok_.column);
}

void TermReader::advance() { tok_ = lex(); }

TermReader::Token TermReader::lex() {
    // skip layout and % comments
    while (pos_ < text_.size()) {
        char c = text_[pos_];
        if (c == '%') {
            while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            if (c == '\n') {
                ++line_;
                col_ = 0;
            }
            ++pos_;
            ++col_;
        } else {
            break;
        }
    }

    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= text_.size()) {
        t.kind = Token::Kind::Eof;
        return t;
    }

    char c = text_[pos_];
    auto take = [&](std::size_t n) {
        std::string s(text_.substr(pos_, n));
        pos_ += n;
        col_ += static_cast<int>(n);
        return s;
    };

    if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t end = pos_;
        while (end < text_.size() && std::isdigit(static_cast<unsigned char>(text_[end])))
            ++end;
        bool is_float = false;
        if (end + 1 < text_.size() && text_[end] == '.' &&
            std::isdigit(static_cast<unsigned char>(text_[end + 1]))) {
            is_float = true;
            ++end;
            while (end < text_.size() &&
                   std::isdigit(static_cast<unsigned char>(text_[end])))
                ++end;
        }
        if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
            std::size_t e = end + 1;
            if (e < text_.size() && (text_[e] == '+' || text_[e] == '-')) ++e;
            if (e < text_.size() && std::isdigit(static_cast<unsigned char>(text_[e]))) {
                is_float = true;
                end = e;
                while (end < text_.size() &&
                       std::isdigit(static_cast<unsigned char>(text_[end])))
                    ++end;
            }
        }
        std::string digits = take(end - pos_);
        if (is_float) {
            t.kind = Token::Kind::Float;
            t.float_value = std::strtod(digits.c_str(), nullptr);
        } else {
            t.kind = Token::Kind::Int;
            t.int_value = std::strtoll(digits.c_str(), nullptr, 10);
        }
        return t;
    }

    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        std::size_t end = pos_;
        while (end < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[end])) ||
                text_[end] == '_'))
            ++end;
        t.text = take(end - pos_);
        t.kind = (std::isupper(static_cast<unsigned char>(c)) || c == '_')
                     ? Token::Kind::Var
                     : Token::Kind::Atom;
        t.followed_by_open = pos_ < text_.size() && text_[pos_] == '(';
        return t;
    }

    if (c == '(' || c == ')' || c == '[' || c == ']' || c == ',' || c == ';' ||
        c == '|') {
        t.kind = Token::Kind::Punct;
        t.text = take(1);
        return t;
    }

    if (is_symbol_char(c)) {
        std::size_t end = pos_;
        while (end < text_.size() && is_symbol_char(text_[end])) ++end;
        t.text = take(end - pos_);
        if (t.text == "." &&
            (pos_ >= text_.size() || text_[pos_] == '%' ||
             std::isspace(static_cast<unsigned char>(text_[pos_])))) {
            t.kind = Token::Kind::End;
            return t;
        }
        t.kind = Token::Kind::Atom;
        t.followed_by_open = pos_ < text_.size() && text_[pos_] == '(';
        return t;
    }

    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
}

std::optional<Term> TermReader::next() {
    if (tok_.kind == Token::Kind::Eof) return std::nullopt;
    Term t = parse(1200);
    if (tok_.kind != Token::Kind::End) fail("expected '.' at end of term");
    advance();
    return t;
}

Term TermReader::parse_compound_args(std::string functor) {
    // current token is '('
    advance();
    std::vector<Term> args;
    args.push_back(parse(999));
    while (tok_.kind == Token::Kind::Punct && tok_.text == ",") {
        advance();
        args.push_back(parse(999));
    }
    if (tok_.kind != Token::Kind::Punct || tok_.text != ")")
        fail("expected ')' in argument list");
    advance();
    return Term::compound(std::move(functor), std::move(args));
}

Term TermReader::parse_list() {
    // current token is '['
    advance();
    std::vector<Term> elems;
    if (!(tok_.kind == Token::Kind::Punct && tok_.text == "]")) {
        elems.push_back(parse(999));
        while (tok_.kind == Token::Kind::Punct && tok_.text == ",") {
            advance();
            elems.push_back(parse(999));
        }
    }
    if (tok_.kind != Token::Kind::Punct || tok_.text != "]") fail("expected ']'");
    advance();
    if (elems.empty()) return Term::atom("$list");
    return Term::compound("$list", std::move(elems));
}

Term TermReader::parse_primary(int max_priority) {
    switch (tok_.kind) {
        case Token::Kind::Int: {
            Term t = Term::integer(tok_.int_value);
            advance();
            return t;
        }
        case Token::Kind::Float: {
            Term t = Term::real(tok_.float_value);
            advance();
            return t;
        }
        case Token::Kind::Var: {
            Term t = Term::var(tok_.text);
            advance();
            return t;
        }
        case Token::Kind::Punct:
            if (tok_.text == "(") {
                advance();
                Term t = parse(1200);
                if (tok_.kind != Token::Kind::Punct || tok_.text != ")")
                    fail("expected ')'");
                advance();
                return t;
            }
            if (tok_.text == "[") return parse_list();
            fail("unexpected '" + tok_.text + "'");
        case Token::Kind::Atom: {
            std::string name = tok_.text;
            if (tok_.followed_by_open) {
                advance();
                return parse_compound_args(std::move(name));
            }
            auto pre = prefix_ops().find(name);
            if (pre != prefix_ops().end() && pre->second.priority <= max_priority) {
                // prefix only when a term can follow; otherwise a plain atom
                Token saved = tok_;
                advance();
                bool term_follows =
                    tok_.kind == Token::Kind::Int || tok_.kind == Token::Kind::Float ||
                    tok_.kind == Token::Kind::Var ||
                    (tok_.kind == Token::Kind::Atom &&
                     (infix_ops().find(tok_.text) == infix_ops().end() ||
                      prefix_ops().count(tok_.text) || tok_.followed_by_open)) ||
                    (tok_.kind == Token::Kind::Punct &&
                     (tok_.text == "(" || tok_.text == "["));
                if (!term_follows) return Term::atom(saved.text);
                if (name == "-" &&
                    (tok_.kind == Token::Kind::Int || tok_.kind == Token::Kind::Float)) {
                    Term lit = tok_.kind == Token::Kind::Int
                                   ? Term::integer(-tok_.int_value)
                                   : Term::real(-tok_.float_value);
                    advance();
                    return lit;
                }
                Term arg = parse(pre->second.arg_priority);
                return Term::compound(name, {std::move(arg)});
            }
            advance();
            return Term::atom(std::move(name));
        }
        default:
            fail("unexpected end of input");
    }
}

Term TermReader::parse(int max_priority) {
    Term left = parse_primary(max_priority);
    int left_priority = 0;

    for (;;) {
        std::string op;
        if (tok_.kind == Token::Kind::Atom) {
            op = tok_.text;
        } else if (tok_.kind == Token::Kind::Punct &&
                   (tok_.text == "," || tok_.text == ";" || tok_.text == "|")) {
            op = tok_.text;
        } else {
            break;
        }
        auto it = infix_ops().find(op);
        if (it == infix_ops().end()) break;
        const InfixOp& info = it->second;
        if (info.priority > max_priority) break;
        int left_max =
            info.type == OpType::yfx ? info.priority : info.priority - 1;
        if (left_priority > left_max) break;
        int right_max =
            info.type == OpType::xfy ? info.priority : info.priority - 1;
        advance();
        Term right = parse(right_max);
        left = Term::compound(op, {std::move(left), std::move(right)});
        left_priority = info.priority;
    }
    return left;
}

}  // namespace chrism
