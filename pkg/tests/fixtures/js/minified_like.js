var a=function(t){return t.split("").reverse().join("")},b=function(t,n){return a(t)+n},c=b("wallet","x");console.log(c);
