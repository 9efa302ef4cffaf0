"""Near-best partial-fraction approximations of exp(x) on (-inf, 0].

Generated by scripts/gen_exp_table.py (Caratheodory-Fejer via Hankel
SVD on the Moebius transplant); do not edit by hand."""

EXP_TABLE = {
    # n=4: sigma_n=8.652e-05, sup error on grid 8.714e-05
    4: (8.614799907008023e-05, [
        ((-0.36783831439986586+3.65813327206329j), (0.0733877984259493+0.4500063589707965j)),
        ((-0.36783831439986586-3.65813327206329j), (0.0733877984259493-0.4500063589707965j)),
        ((1.5484005705393946+1.1918258539276125j), (-0.061680755820739744-1.9050666800620366j)),
        ((1.5484005705393946-1.1918258539276125j), (-0.061680755820739744+1.9050666800620366j)),
    ]),
    # n=6: sigma_n=1.008e-06, sup error on grid 1.015e-06
    6: (1.0043936176422465e-06, [
        ((-1.7819882759207955+6.196512467347579j), (-0.083581541461019-0.10642900534255063j)),
        ((-1.7819882759207955-6.196512467347579j), (-0.083581541461019+0.10642900534255063j)),
        ((1.158552571719314+3.6147726008201047j), (0.6630060439627602+1.451412841151001j)),
        ((1.158552571719314-3.6147726008201047j), (0.6630060439627602-1.451412841151001j)),
        ((2.4006029389330066+1.1931293084023118j), (-0.5790123188845325-4.286889681057857j)),
        ((2.4006029389330066-1.1931293084023118j), (-0.5790123188845325+4.286889681057857j)),
    ]),
    # n=8: sigma_n=1.172e-08, sup error on grid 1.180e-08
    8: (1.167678429878971e-08, [
        ((-3.4085395015771103+8.773034564444648j), (0.028129765058655293+0.011577377268418504j)),
        ((-3.4085395015771103-8.773034564444648j), (0.028129765058655293-0.011577377268418504j)),
        ((0.26949098724632153+6.082032592710129j), (-0.6325880338291865-0.44392306042748503j)),
        ((0.26949098724632153-6.082032592710129j), (-0.6325880338291865+0.44392306042748503j)),
        ((2.292249147709349+3.600771496075024j), (2.43624063049458+3.7167556398228543j)),
        ((2.292249147709349-3.600771496075024j), (2.43624063049458-3.7167556398228543j)),
        ((3.220945244950625+1.1936196054171766j), (-1.8317716389792367-9.525608254152917j)),
        ((3.220945244950625-1.1936196054171766j), (-1.8317716389792367+9.525608254152917j)),
    ]),
    # n=10: sigma_n=1.361e-10, sup error on grid 1.370e-10
    10: (1.357673403231594e-10, [
        ((-5.161191271764993+11.375156252224746j), (-0.005784904102882999+0.0006858503092117665j)),
        ((-5.161191271764993-11.375156252224746j), (-0.005784904102882999-0.0006858503092117665j)),
        ((-0.8944047014172559+8.582756898772944j), (0.272586983347862+0.014211725876081516j)),
        ((-0.8944047014172559-8.582756898772944j), (0.272586983347862-0.014211725876081516j)),
        ((1.7154060159265794+6.038934925576287j), (-2.5655849542707383-1.2163856959253545j)),
        ((1.7154060159265794-6.038934925576287j), (-2.5655849542707383+1.2163856959253545j)),
        ((3.2837528833705174+3.5943867724049663j), (7.117165083840144+8.819533154022798j)),
        ((3.2837528833705174-3.5943867724049663j), (7.117165083840144-8.819533154022798j)),
        ((4.0277324676495025+1.1938560664709055j), (-4.818381973986598-21.05459726636498j)),
        ((4.0277324676495025-1.1938560664709055j), (-4.818381973986598+21.05459726636498j)),
    ]),
    # n=12: sigma_n=1.579e-12, sup error on grid 1.588e-12
    12: (1.5785820575195561e-12, [
        ((-6.998687908596034+13.995916624979149j), (0.0008184334858507222-0.0005813535728069478j)),
        ((-6.998687908596034-13.995916624979149j), (0.0008184334858507222+0.0005813535728069478j)),
        ((-2.2359682461246635+11.109296232707583j), (-0.06857149432361824+0.038419082752710304j)),
        ((-2.2359682461246635-11.109296232707583j), (-0.06857149432361824-0.038419082752710304j)),
        ((0.8517070967197617+8.503832825637463j), (1.3194115346999638-0.18352358304351207j)),
        ((0.8517070967197617-8.503832825637463j), (1.3194115346999638+0.18352358304351207j)),
        ((2.917868545083499+6.017345924094123j), (-8.238255934276834-2.7961912606270607j)),
        ((2.917868545083499-6.017345924094123j), (-8.238255934276834+2.7961912606270607j)),
        ((4.206124204321779+3.590920758885634j), (18.785977418613545+20.23728512520395j)),
        ((4.206124204321779-3.590920758885634j), (18.785977418613545-20.23728512520395j)),
        ((4.827493452164459+1.1939879912234395j), (-11.799379953599622-46.41163533707949j)),
        ((4.827493452164459-1.1939879912234395j), (-11.799379953599622+46.41163533707949j)),
    ]),
    # n=14: sigma_n=1.832e-14, sup error on grid 2.641e-14
    14: (2.148999387542939e-14, [
        ((-8.897773186468875+16.63098261990231j), (-7.154287563094536e-05+0.0001436104496146367j)),
        ((-8.897773186468875-16.63098261990231j), (-7.154287563094536e-05-0.0001436104496146367j)),
        ((-3.7032750494229547+13.656371871482916j), (0.009439025136004267-0.01718479192042312j)),
        ((-3.7032750494229547-13.656371871482916j), (0.009439025136004267+0.01718479192042312j)),
        ((-0.20875863825005983+10.991260561902024j), (-0.37636003879650864+0.3351834694683252j)),
        ((-0.20875863825005983-10.991260561902024j), (-0.37636003879650864-0.3351834694683252j)),
        ((2.269783829231251+8.461737973039881j), (4.807112101122478-1.320979383287048j)),
        ((2.269783829231251-8.461737973039881j), (4.807112101122478+1.320979383287048j)),
        ((3.9933697105786146+6.00483164223525j), (-23.498232092867298-5.808359125422177j)),
        ((3.9933697105786146-6.00483164223525j), (-23.498232092867298+5.808359125422177j)),
        ((5.089345060580737+3.5888240290269495j), (46.933274482855595+45.643649765048394j)),
        ((5.089345060580737-3.5888240290269495j), (46.933274482855595-45.643649765048394j)),
        ((5.62314257274606+1.1940690463440018j), (-27.87516193449101-102.14733999710083j)),
        ((5.62314257274606-1.1940690463440018j), (-27.87516193449101+102.14733999710083j)),
    ]),
}
