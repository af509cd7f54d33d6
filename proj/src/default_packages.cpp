// Shipped handler bundles, written in the on-disk handler format.

#include "default_packages.hpp"

namespace texhtml::detail {

namespace {

constexpr std::string_view core_handler = R"pkg(
package latex
kind implemented

# preamble and document structure
structural documentclass 1 optional
structural usepackage 1 optional
structural RequirePackage 1 optional
structural begin 1
structural end 1
structural part 1 optional
structural chapter 1 optional
structural section 1 optional
structural subsection 1 optional
structural subsubsection 1 optional
structural paragraph 1 optional
structural subparagraph 1 optional
structural title 1 optional
structural author 1 optional
structural date 1
structural thanks 1
structural and 0
structural maketitle 0
structural item 0 optional
structural bibitem 1 optional
structural caption 1 optional
structural label 1
structural ref 1
structural pageref 1
structural cite 1 optional
structural footnote 1 optional
structural input 1
structural include 1
structural verb 0
structural setcounter 2
structural par 0
structural \ 0 optional
structural newline 0
structural linebreak 0 optional

# inline markup
structural emph 1
structural textbf 1
structural textit 1
structural texttt 1
structural textsc 1
structural textsf 1
structural textrm 1
structural textup 1
structural textmd 1
structural textsl 1
structural textnormal 1
structural underline 1
structural textsuperscript 1
structural textsubscript 1
structural bf 0
structural it 0
structural em 0
structural tt 0
structural sc 0
structural sf 0
structural rm 0
structural sl 0
structural bfseries 0
structural itshape 0
structural ttfamily 0
structural scshape 0
structural sffamily 0
structural rmfamily 0
structural slshape 0
structural upshape 0
structural mdseries 0
structural normalfont 0

# tabular rules and spans
structural hline 0
structural cline 1
structural multicolumn 3
structural multirow 3

# accents
structural ' 1
structural ` 1
structural ^ 1
structural " 1
structural ~ 1
structural = 1
structural . 1
structural c 1
structural v 1
structural u 1
structural H 1

# text symbols and control symbols (also meaningful in math)
math % 0
math & 0
math $ 0
math # 0
math _ 0
math { 0
math } 0
math <space> 0
math , 0
math ; 0
math : 0
math ! 0
math / 0
math - 0
math @ 0
math | 0
math [ 0
math ] 0
math ( 0
math ) 0
math textbackslash 0
math textasciitilde 0
math textasciicircum 0
math textunderscore 0
math textbar 0
math textless 0
math textgreater 0
math textbraceleft 0
math textbraceright 0
math textdollar 0
math textendash 0
math textemdash 0
math textquotedblleft 0
math textquotedblright 0
math textquoteleft 0
math textquoteright 0
math textregistered 0
math texttrademark 0
math textdegree 0
math textbullet 0
math S 0
math P 0
math copyright 0
math dag 0
math ddag 0
math pounds 0
math ss 0
math ae 0
math AE 0
math oe 0
math OE 0
math o 0
math O 0
math aa 0
math AA 0
math l 0
math L 0
math i 0
math j 0
math ldots 0
math dots 0
math LaTeX 0
math LaTeXe 0
math TeX 0
math quad 0
math qquad 0
math enspace 0
math thinspace 0

# boxes that only wrap their content
expandable mbox 1 = #1
expandable fbox 1 = #1
expandable hbox 1 = #1
expandable ensuremath 1 = $#1$

# layout-only commands
ignored centering 0
ignored raggedright 0
ignored raggedleft 0
ignored noindent 0
ignored indent 0
ignored smallskip 0
ignored medskip 0
ignored bigskip 0
ignored newpage 0
ignored clearpage 0
ignored cleardoublepage 0
ignored pagebreak 0 optional
ignored nopagebreak 0 optional
ignored vfill 0
ignored hfill 0
ignored vspace 1
ignored hspace 1
ignored tiny 0
ignored scriptsize 0
ignored footnotesize 0
ignored small 0
ignored normalsize 0
ignored large 0
ignored Large 0
ignored LARGE 0
ignored huge 0
ignored Huge 0
ignored protect 0
ignored relax 0
ignored makeatletter 0
ignored makeatother 0
ignored tableofcontents 0
ignored listoffigures 0
ignored listoftables 0
ignored bibliographystyle 1
ignored bibliography 1
ignored pagestyle 1
ignored thispagestyle 1
ignored pagenumbering 1
ignored setlength 2
ignored addtolength 2
ignored linespread 1
ignored newtheorem 2 optional
ignored newcounter 1 optional
ignored addcontentsline 3
ignored appendix 0
ignored today 0
ignored sloppy 0
ignored frenchspacing 0
ignored onecolumn 0
ignored twocolumn 0 optional
ignored selectlanguage 1
ignored doublespacing 0
ignored onehalfspacing 0
ignored singlespacing 0
ignored nocite 1
ignored nonumber 0
ignored notag 0
ignored allowbreak 0
ignored strut 0
ignored null 0
ignored phantom 1
ignored index 1
ignored footnotemark 0 optional
ignored footnotetext 1 optional
ignored textwidth 0
ignored linewidth 0
ignored columnwidth 0
ignored textheight 0
ignored hsize 0

# math vocabulary; math content is preserved as source for the renderer
math frac 2
math sqrt 1 optional
math sum 0
math prod 0
math coprod 0
math int 0
math oint 0
math lim 0
math limsup 0
math liminf 0
math sup 0
math inf 0
math max 0
math min 0
math log 0
math ln 0
math lg 0
math exp 0
math sin 0
math cos 0
math tan 0
math cot 0
math sec 0
math csc 0
math sinh 0
math cosh 0
math tanh 0
math arcsin 0
math arccos 0
math arctan 0
math det 0
math dim 0
math ker 0
math deg 0
math gcd 0
math hom 0
math Pr 0
math arg 0
math alpha 0
math beta 0
math gamma 0
math delta 0
math epsilon 0
math varepsilon 0
math zeta 0
math eta 0
math theta 0
math vartheta 0
math iota 0
math kappa 0
math lambda 0
math mu 0
math nu 0
math xi 0
math pi 0
math varpi 0
math rho 0
math varrho 0
math sigma 0
math varsigma 0
math tau 0
math upsilon 0
math phi 0
math varphi 0
math chi 0
math psi 0
math omega 0
math Gamma 0
math Delta 0
math Theta 0
math Lambda 0
math Xi 0
math Pi 0
math Sigma 0
math Upsilon 0
math Phi 0
math Psi 0
math Omega 0
math leq 0
math le 0
math geq 0
math ge 0
math neq 0
math ne 0
math approx 0
math equiv 0
math sim 0
math simeq 0
math cong 0
math propto 0
math ll 0
math gg 0
math subset 0
math subseteq 0
math supset 0
math supseteq 0
math in 0
math notin 0
math ni 0
math mid 0
math parallel 0
math perp 0
math to 0
math rightarrow 0
math leftarrow 0
math Rightarrow 0
math Leftarrow 0
math leftrightarrow 0
math Leftrightarrow 0
math longrightarrow 0
math longleftarrow 0
math Longrightarrow 0
math mapsto 0
math implies 0
math iff 0
math uparrow 0
math downarrow 0
math times 0
math cdot 0
math div 0
math pm 0
math mp 0
math ast 0
math star 0
math circ 0
math bullet 0
math oplus 0
math otimes 0
math cup 0
math cap 0
math wedge 0
math vee 0
math land 0
math lor 0
math neg 0
math lnot 0
math setminus 0
math infty 0
math partial 0
math nabla 0
math forall 0
math exists 0
math emptyset 0
math hbar 0
math ell 0
math Re 0
math Im 0
math aleph 0
math prime 0
math cdots 0
math vdots 0
math ddots 0
math langle 0
math rangle 0
math lceil 0
math rceil 0
math lfloor 0
math rfloor 0
math lvert 0
math rvert 0
math lVert 0
math rVert 0
math lbrace 0
math rbrace 0
math vert 0
math Vert 0
math mathbf 1
math mathit 1
math mathrm 1
math mathsf 1
math mathtt 1
math mathcal 1
math hat 1
math bar 1
math vec 1
math tilde 1
math dot 1
math ddot 1
math check 1
math breve 1
math acute 1
math grave 1
math overline 1
math widehat 1
math widetilde 1
math overbrace 1
math underbrace 1
math left 0
math right 0
math big 0
math Big 0
math bigg 0
math Bigg 0
math bigl 0
math bigr 0
math Bigl 0
math Bigr 0
math middle 0
math limits 0
math nolimits 0
math displaystyle 0
math textstyle 0
math scriptstyle 0
math over 0
math choose 0
math stackrel 2
math overset 2
math underset 2
math not 0
math colon 0
math cdotp 0
math ldotp 0
math top 0
math bot 0
math angle 0
math triangle 0
math Box 0
math diamond 0
math flat 0
math sharp 0
math natural 0
math wp 0
math imath 0
math jmath 0
math smallint 0
math bigcup 0
math bigcap 0
math bigoplus 0
math bigotimes 0
math bigvee 0
math bigwedge 0
math uplus 0
math sqcup 0
math sqcap 0
math odot 0
math ominus 0
math oslash 0
math dagger 0
math ddagger 0
math amalg 0
math wr 0
math prec 0
math succ 0
math preceq 0
math succeq 0
math asymp 0
math doteq 0
math models 0
math vdash 0
math dashv 0
math smile 0
math frown 0
math bowtie 0
math leadsto 0
math hookrightarrow 0
math hookleftarrow 0
math rightharpoonup 0
math leftharpoonup 0
math nearrow 0
math searrow 0
math swarrow 0
math nwarrow 0
math Uparrow 0
math Downarrow 0
math updownarrow 0
math Updownarrow 0
math longmapsto 0
math Longleftarrow 0
math Longleftrightarrow 0
math longleftrightarrow 0

environment document document
environment itemize itemize
environment enumerate enumerate
environment description description
environment thebibliography bibliography 1
environment figure figure
environment figure* figure
environment table table
environment table* table
environment tabular tabular 1 optional
environment tabular* tabular 2 optional
environment verbatim verbatim
environment verbatim* verbatim
environment quote quote
environment quotation quote
environment verse quote
environment abstract abstract
environment center transparent
environment flushleft transparent
environment flushright transparent
environment minipage transparent 1 optional
environment small transparent
environment footnotesize transparent
environment equation math-numbered
environment displaymath math-unnumbered
environment eqnarray math-numbered
environment eqnarray* math-unnumbered
environment math math-inline
)pkg";

constexpr std::string_view graphicx_handler = R"pkg(
package graphicx
kind implemented
structural includegraphics 1 optional
ignored graphicspath 1
ignored DeclareGraphicsExtensions 1
expandable rotatebox 2 = #2
expandable scalebox 2 = #2
expandable resizebox 3 = #3
)pkg";

constexpr std::string_view amsmath_handler = R"pkg(
package amsmath
kind implemented
structural eqref 1
math text 1
math operatorname 1
math boldsymbol 1
math binom 2
math dfrac 2
math tfrac 2
math tag 1
math iint 0
math iiint 0
math dots 0
math dotsc 0
math dotsb 0
math xrightarrow 1 optional
math xleftarrow 1 optional
ignored DeclareMathOperator 2
ignored numberwithin 2
ignored allowdisplaybreaks 0 optional
environment equation* math-unnumbered
environment align math-numbered
environment align* math-unnumbered
environment gather math-numbered
environment gather* math-unnumbered
environment multline math-numbered
environment multline* math-unnumbered
environment flalign math-numbered
environment flalign* math-unnumbered
environment alignat math-numbered 1
environment alignat* math-unnumbered 1
)pkg";

constexpr std::string_view amssymb_handler = R"pkg(
package amssymb
kind implemented
math mathbb 1
math mathfrak 1
math leqslant 0
math geqslant 0
math varnothing 0
math therefore 0
math because 0
math blacksquare 0
math square 0
math lesssim 0
math gtrsim 0
math nexists 0
math complement 0
math checkmark 0
math triangleq 0
math rightrightarrows 0
math twoheadrightarrow 0
math nmid 0
math nleq 0
math ngeq 0
)pkg";

constexpr std::string_view url_handler = R"pkg(
package url
kind implemented
structural url 1
ignored urlstyle 1
)pkg";

constexpr std::string_view hyperref_handler = R"pkg(
package hyperref
kind implemented
structural url 1
structural href 2
structural autoref 1
structural nameref 1
ignored hypersetup 1
ignored phantomsection 0
)pkg";

constexpr std::string_view xcolor_handler = R"pkg(
package xcolor
kind implemented
ignored color 1 optional
ignored definecolor 3
ignored pagecolor 1 optional
expandable textcolor 3 [] = #3
expandable colorbox 2 = #2
expandable fcolorbox 3 = #3
)pkg";

constexpr std::string_view enumitem_handler = R"pkg(
package enumitem
kind implemented
ignored setlist 1 optional
ignored newlist 3
ignored setlistdepth 1
)pkg";

constexpr std::string_view booktabs_handler = R"pkg(
package booktabs
kind implemented
structural toprule 0 optional
structural midrule 0 optional
structural bottomrule 0 optional
structural cmidrule 1 optional
ignored addlinespace 0 optional
)pkg";

constexpr std::string_view natbib_handler = R"pkg(
package natbib
kind implemented
structural citep 1 optional
structural citet 1 optional
structural citealp 1 optional
structural citeauthor 1
structural citeyear 1
ignored setcitestyle 1
)pkg";

constexpr std::string_view ignore_list[] = {
    "geometry", "babel", "inputenc", "fontenc", "microtype", "setspace",
};

}  // namespace

std::vector<std::string_view> core_handler_source() { return {core_handler}; }

std::vector<std::string_view> default_handler_sources() {
  return {graphicx_handler, amsmath_handler, amssymb_handler, url_handler,      hyperref_handler,
          xcolor_handler,   enumitem_handler, booktabs_handler, natbib_handler};
}

std::vector<std::string_view> default_ignored_packages() {
  return {std::begin(ignore_list), std::end(ignore_list)};
}

}  // namespace texhtml::detail
