"""Reference values for the ``sqrt(c^2 - 6c + 30)`` benchmark.

Start 40, delta = 0.95, zeta = 0.30, gamma = 0.90. Values are kept exactly as
published (some cells carry 9 decimals, some 11), so comparisons are numeric.
"""

COLUMNS = ("agarwal", "noor", "abbas_nazir", "thakur", "new")

# (step, agarwal, noor, abbas_nazir, thakur, new)
TABLE1 = (
    (1, "40", "40", "40", "40", "40"),
    (2, "36.514581536", "36.1407358454", "34.6327094201", "33.826119187", "32.0516661514"),
    (3, "33.0679397292", "32.3319800634", "29.367596341", "27.7952382214", "24.3704817561"),
    (4, "29.6685026434", "28.5864001018", "24.2441205249", "21.9755503569", "17.1512394673"),
    (5, "26.3275706425", "24.9216680332", "19.3272253806", "16.4912748872", "10.8507668765"),
    (6, "23.0606740255", "21.3631923337", "14.7312047769", "11.58909835", "6.56090714498"),
    (7, "19.8897435795", "17.9486804932", "10.669341116", "7.76797689976", "5.170067389"),
    (8, "16.8466375807", "14.7357042537", "7.52753037638", "5.69419487242", "5.01234906914"),
    (9, "13.9788293647", "11.8131560009", "5.74872981287", "5.11047433488", "5.00085298124"),
    (10, "11.3578863208", "9.31239170384", "5.15293698217", "5.01509864089", "5.00005870115"),
    (11, "9.08838738905", "7.39232766846", "5.02680130355", "5.002010937", "5.00000403871"),
    (12, "7.30211704972", "6.14706302858", "5.00453782329", "5.00026687693", "5.00000027786"),
    (13, "6.10042750793", "5.48679502226", "5.00076360356", "5.00003540113", "5.00000001912"),
    (14, "5.44793732586", "5.19164605164", "5.00012836141", "5.00000469565", "5.00000000132"),
    (15, "5.16283265193", "5.07277137427", "5.0000215737", "5.00000062283", "5.00000000009"),
    (16, "5.05591482526", "5.02722036618", "5.00000362578", "5.00000008261", "5.00000000001"),
    (17, "5.0187690152", "5.01012264162", "5.00000060936", "5.00000001096", "5.00000000000"),
    (18, "5.00624950826", "5.00375610854", "5.00000010241", "5.00000000145", "5.00000000000"),
    (19, "5.00207518849", "5.00139259846", "5.00000001721", "5.00000000019", "5.00000000000"),
    (20, "5.00068844699", "5.00051615633", "5.00000000289", "5.00000000003", "5.00000000000"),
    (21, "5.00022832364", "5.00019128789", "5.00000000049", "5.00000000000", "5.00000000000"),
    (22, "5.00007571593", "5.00007088845", "5.00000000008", "5.00000000000", "5.00000000000"),
    (23, "5.00002510782", "5.0000262698", "5.00000000001", "5.00000000000", "5.00000000000"),
    (24, "5.0000083258", "5.00000973499", "5.00000000000", "5.00000000000", "5.00000000000"),
    (25, "5.00000276084", "5.00000360756", "5.00000000000", "5.00000000000", "5.00000000000"),
    (26, "5.0000009155", "5.00000133688", "5.00000000000", "5.00000000000", "5.00000000000"),
    (27, "5.00000030358", "5.00000049541", "5.00000000000", "5.00000000000", "5.00000000000"),
    (28, "5.00000010067", "5.00000018359", "5.00000000000", "5.00000000000", "5.00000000000"),
    (29, "5.00000003338", "5.00000006803", "5.00000000000", "5.00000000000", "5.00000000000"),
    (30, "5.00000001107", "5.00000002521", "5.00000000000", "5.00000000000", "5.00000000000"),
)

START = 40.0
DELTA = 0.95
ZETA = 0.30
GAMMA = 0.90
TOLERANCE = 5e-10
